#include <gtest/gtest.h>

#include <cmath>

#include "spikelab/thresholds.hpp"

using namespace spikelab;

TEST(Thresholds, SparseBernoulli) {
  const ThresholdReport rep = thresholds(bernoulli_prior(0.02));
  EXPECT_NEAR(rep.delta_amp, 0.00095358, 1e-8);
  EXPECT_NEAR(rep.delta_rs, 0.00123617, 1e-8);
  ASSERT_TRUE(rep.amp_bracket && rep.rs_bracket);
  EXPECT_LE(rep.rs_bracket->width(), 1e-6 * rep.delta_rs);
  EXPECT_LT(rep.delta_amp, rep.delta_rs);
  EXPECT_EQ(rep.stationary_points.size(), 3u);
  EXPECT_FALSE(rep.probes.empty());
}

TEST(Thresholds, IndicatorsFlipAcrossThresholds) {
  const DiscretePrior p = bernoulli_prior(0.02);
  EXPECT_TRUE(amp_success(ScalarModel(p, 0.00095)));
  EXPECT_FALSE(amp_success(ScalarModel(p, 0.00096)));
  EXPECT_TRUE(rs_success(ScalarModel(p, 0.001236)));
  EXPECT_FALSE(rs_success(ScalarModel(p, 0.0012365)));
}

TEST(Thresholds, BisectionOnGivenInterval) {
  const DiscretePrior p = bernoulli_prior(0.02);
  EXPECT_NEAR(delta_rs(p, 0.0012, 0.00125), 0.00123617, 1e-8);
  EXPECT_NEAR(delta_amp(p, 0.0008, 0.0012), 0.00095358, 1e-8);
}

TEST(Thresholds, MissingBracketIsAnError) {
  const DiscretePrior p = bernoulli_prior(0.02);
  try {
    delta_rs(p, 0.0013, 0.002);
    FAIL() << "expected no_bracket";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::no_bracket);
  }
  EXPECT_THROW(delta_amp(p, 0.001, 0.0005), error);
}

TEST(Thresholds, DenseBernoulliHasNoTransition) {
  const ThresholdReport rep = thresholds(bernoulli_prior(0.1));
  EXPECT_TRUE(std::isinf(rep.delta_amp));
  EXPECT_TRUE(std::isinf(rep.delta_rs));
}

TEST(Thresholds, CommunityDetection) {
  const DiscretePrior balanced = with_bias(community_prior(0.3));
  EXPECT_NEAR(delta_rs(balanced, 0.5, 2.0), 0.99981, 1e-4);
  EXPECT_NEAR(delta_amp(balanced, 0.5, 2.0), 0.99835, 1e-4);
  const DiscretePrior unbalanced = with_bias(community_prior(0.05));
  EXPECT_NEAR(delta_rs(unbalanced, 0.5, 3.0), 1.670901, 1e-5);
  EXPECT_NEAR(delta_amp(unbalanced, 0.5, 3.0), 1.006245, 1e-5);
}

TEST(Thresholds, ScanFindsNarrowFailingWindow) {
  // Succeeds everywhere except a window too narrow for the coarse grid; E_good jumps across it.
  const Indicator ok = [](double d) {
    const bool inside = d > 1.0 && d < 1.02;
    return ProbeResult{!inside, d < 1.0 ? 0.0 : 1.0};
  };
  const auto b = scan_first_flip(ok, 0.1, 10.0, 5, 0.5, 1e-6);
  ASSERT_TRUE(b.has_value());
  EXPECT_LE(b->lo, 1.0);
  EXPECT_GT(b->hi, 1.0);
  EXPECT_LT(b->hi, 1.02);
}
