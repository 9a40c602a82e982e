#include <gtest/gtest.h>

#include <cmath>

#include "spikelab/amp.hpp"

using namespace spikelab;

TEST(Amp, InstanceIsSymmetricAndReproducible) {
  const DiscretePrior p = bernoulli_prior(0.3);
  const Instance a = sample_instance(p, 50, 0.1, 42), b = sample_instance(p, 50, 0.1, 42);
  EXPECT_EQ(a.W, b.W);
  EXPECT_EQ(a.s, b.s);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 50; ++j) EXPECT_EQ(a.w(i, j), a.w(j, i));
  EXPECT_NE(sample_instance(p, 50, 0.1, 43).W, a.W);
}

TEST(Amp, NoiselessInstanceIsRankOne) {
  const Instance inst = sample_instance(rademacher_prior(), 20, 0.0, 1);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) EXPECT_DOUBLE_EQ(inst.w(i, j), inst.s[i] * inst.s[j] / std::sqrt(20.0));
}

TEST(Amp, SignalFollowsPrior) {
  rng_engine rng(3);
  const auto s = sample_signal(bernoulli_prior(0.25), 40000, rng);
  double ones = 0.0;
  for (double x : s) ones += x;
  EXPECT_NEAR(ones / 40000.0, 0.25, 4 * std::sqrt(0.25 * 0.75 / 40000.0));
}

TEST(Amp, ErrorsOfPerfectEstimateVanish) {
  const std::vector<double> s{1.0, 0.0, 1.0, 0.0};
  const auto [vmse, mmse_value] = estimate_errors(s, s);
  EXPECT_EQ(vmse, 0.0);
  EXPECT_EQ(mmse_value, 0.0);
  const auto [v0, m0] = estimate_errors(std::vector<double>(4, 0.0), s);
  EXPECT_DOUBLE_EQ(v0, 0.5);
  EXPECT_DOUBLE_EQ(m0, 0.25);
}

TEST(Amp, TracksStateEvolution) {
  const DiscretePrior p = bernoulli_prior(0.2);
  const double delta = 0.02, v = p.second_moment();
  const std::size_t n = 1500;
  const SETrace se = run_se(ScalarModel(p, delta), v, {10, 0.0, {}});
  amp_options opts;
  opts.t_max = 10;
  std::vector<double> vsum(11, 0.0), msum(11, 0.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const AmpRun run = run_amp(sample_instance(p, n, delta, seed), p, opts);
    ASSERT_FALSE(run.diverged);
    ASSERT_EQ(run.history.size(), 10u);
    EXPECT_EQ(run.history.front().t, 1u);
    for (const AmpIterate& it : run.history) {
      vsum[it.t] += it.vmse / 3.0;
      msum[it.t] += it.mmse / 3.0;
    }
  }
  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t t = 1; t <= 10; ++t) {
    EXPECT_NEAR(vsum[t], se.values[t], tol) << "t = " << t;
    EXPECT_NEAR(msum[t], v * v - (v - se.values[t]) * (v - se.values[t]), tol) << "t = " << t;
  }
  EXPECT_LT(vsum[10], 0.5 * vsum[1]);
}

TEST(Amp, SeDrivenVariantAgreesWithEmpiricalSnr) {
  const DiscretePrior p = bernoulli_prior(0.2);
  const Instance inst = sample_instance(p, 1000, 0.02, 9);
  amp_options a, b;
  a.t_max = b.t_max = 8;
  b.se_driven = true;
  const AmpRun ra = run_amp(inst, p, a), rb = run_amp(inst, p, b);
  EXPECT_NEAR(ra.history.back().vmse, rb.history.back().vmse, 0.02);
}

TEST(Amp, RejectsZeroNoise) {
  const DiscretePrior p = bernoulli_prior(0.2);
  EXPECT_THROW(run_amp(sample_instance(p, 10, 0.0, 1), p), error);
}

TEST(CoupledAmp, PinnedBlocksAreExactAndRunIsReproducible) {
  const DiscretePrior p = bernoulli_prior(0.2);
  const CouplingMatrix c = triangle_coupling(8, 2);
  const CoupledInstance inst = sample_coupled_instance(p, c, 150, 0.03, 5);
  const CoupledAmpRun a = run_coupled_amp(inst, p, 6), b = run_coupled_amp(inst, p, 6);
  ASSERT_EQ(a.vmse.size(), 7u);
  ASSERT_EQ(a.mmse.size(), 7u);
  EXPECT_EQ(a.vmse, b.vmse);
  const auto pinned = seed_blocks(c);
  for (const auto& row : a.vmse)
    for (std::size_t mu = 0; mu < c.size(); ++mu)
      if (pinned[mu]) {
        EXPECT_EQ(row[mu], 0.0);
      }
  // Free blocks start near zero, so their error is close to v.
  EXPECT_NEAR(a.vmse[0][4], p.second_moment(), 0.1);
}

TEST(CoupledAmp, TracksCoupledStateEvolution) {
  const DiscretePrior p = bernoulli_prior(0.2);
  const CouplingMatrix c = triangle_coupling(12, 2);
  const ScalarModel model(p, 0.03);
  coupled_se_options so;
  so.max_sweeps = 8;
  so.tol = 0.0;
  const CoupledSETrace se = run_coupled_se(model, c, so);
  const std::size_t n = 600;
  const CoupledAmpRun run = run_coupled_amp(sample_coupled_instance(p, c, n, 0.03, 11), p, 8);
  ASSERT_FALSE(run.diverged);
  for (std::size_t t = 0; t <= 8; ++t)
    for (std::size_t mu = 0; mu < c.size(); ++mu)
      EXPECT_NEAR(run.vmse[t][mu], se.history[t][mu], 6.0 / std::sqrt(static_cast<double>(n)));
}
