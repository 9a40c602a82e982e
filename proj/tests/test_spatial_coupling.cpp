#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "spikelab/spatial_coupling.hpp"
#include "spikelab/thresholds.hpp"

using namespace spikelab;

TEST(Coupling, TriangleKernelIsDoublyStochasticAndSymmetric) {
  const CouplingMatrix c = triangle_coupling(20, 4);
  const auto m = c.dense();
  for (std::size_t mu = 0; mu < c.size(); ++mu) {
    double row = 0.0;
    for (std::size_t nu = 0; nu < c.size(); ++nu) {
      row += m[mu][nu];
      EXPECT_EQ(m[mu][nu], m[nu][mu]);
    }
    EXPECT_NEAR(row, 1.0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(c.sup_entry(), 1.0 / 5.0);
  EXPECT_EQ(c(0, 20), c.at_offset(1));
  EXPECT_EQ(c(0, 5), 0.0);
  EXPECT_EQ(c.ring_distance(1, 19), 3u);
}

TEST(Coupling, TriangleKernelIsPositiveSemidefinite) {
  for (double lambda : triangle_coupling(30, 6).row_spectrum()) EXPECT_GE(lambda, -1e-14);
}

TEST(Coupling, RejectsWideWindow) {
  try {
    triangle_coupling(10, 6);
    FAIL() << "expected bad_window";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::bad_window);
  }
}

TEST(Coupling, SeedBlocksAreContiguousOnRing) {
  const CouplingMatrix c = triangle_coupling(20, 3);
  const auto pinned = seed_blocks(c);
  EXPECT_EQ(std::accumulate(pinned.begin(), pinned.end(), 0), 7);
  for (std::size_t mu : {0u, 1u, 2u, 17u, 18u, 19u, 20u}) EXPECT_TRUE(pinned[mu]);
  EXPECT_FALSE(pinned[3]);
  EXPECT_FALSE(pinned[16]);
}

TEST(Coupling, ConstantProfileReducesToUncoupled) {
  const ScalarModel model(bernoulli_prior(0.2), 0.04);
  const CouplingMatrix c = triangle_coupling(16, 3);
  const std::vector<double> flat(c.size(), 0.07);
  for (double e : t_c(flat, c, model, {})) EXPECT_NEAR(e, t_u(model, 0.07), 1e-15);
  EXPECT_NEAR(coupled_potential(flat, c, model), 17.0 * f_rs_u(model, 0.07), 1e-12);
  EXPECT_NEAR(shift_difference(flat, c, model), 0.0, 1e-12);
}

TEST(Coupling, ShiftDifferenceTelescopesToBoundaryTerms) {
  const ScalarModel model(bernoulli_prior(0.02), 0.0012);
  const CouplingMatrix c = triangle_coupling(40, 4);
  std::vector<double> profile(c.size());
  const double lo = 0.0064, hi = 0.0193;
  for (std::size_t mu = 0; mu < profile.size(); ++mu)
    profile[mu] = lo + (hi - lo) / (1.0 + std::exp(-(static_cast<double>(mu) - 20.0) / 3.0));
  profile.back() = hi;
  const ChainBoundary chain{lo, hi};
  EXPECT_NEAR(shift_difference(profile, c, model, chain), shift_difference_boundary(profile, c, model, chain), 1e-8);
}

TEST(Coupling, SaturatedProfileShape) {
  const std::vector<double> fp{0.0, 0.2, 0.1, 0.5, 0.9, 0.7, 0.3, 0.0};
  const std::vector<double> sat = saturated_profile(fp, 0.25);
  const std::vector<double> expected{0.25, 0.25, 0.25, 0.5, 0.9, 0.9, 0.9, 0.9};
  EXPECT_EQ(sat, expected);
}

TEST(CoupledSE, ReachesGoodFixedPointBelowInformationThreshold) {
  const ScalarModel model(bernoulli_prior(0.02), 0.00122);
  const CoupledSETrace trace = run_coupled_se(model, triangle_coupling(400, 10));
  ASSERT_TRUE(trace.profile.converged);
  EXPECT_TRUE(trace.tabulated);
  EXPECT_NEAR(e_good(model), 0.0069489214, 1e-9);
  EXPECT_LE(trace.profile.max_value(), e_good(model) + 1e-6);
  EXPECT_FALSE(amp_success(model));
}

TEST(CoupledSE, StallsAboveInformationThreshold) {
  const ScalarModel model(bernoulli_prior(0.02), 0.00125);
  coupled_se_options opts;
  opts.history_stride = 0;
  const CoupledSETrace trace = run_coupled_se(model, triangle_coupling(400, 10), opts);
  ASSERT_TRUE(trace.profile.converged);
  EXPECT_NEAR(trace.profile.max_value(), 0.01934, 1e-4);

  // The shift of the saturated stalled profile telescopes to the uncoupled potential gap.
  const double good = e_good(model);
  const std::vector<double> sat = saturated_profile(trace.profile.values, good);
  const ChainBoundary chain{good, trace.profile.max_value()};
  const CouplingMatrix c = triangle_coupling(400, 10);
  const double diff = shift_difference(sat, c, model, chain);
  EXPECT_NEAR(diff, shift_difference_boundary(sat, c, model, chain), 1e-8);
  const double gap = potential_gap(model);
  EXPECT_NEAR(gap, -0.000338709, 1e-9);
  EXPECT_NEAR(diff, -gap, 0.05 * std::abs(gap));
}

TEST(CoupledSE, TabulationMatchesDirectQuadrature) {
  const ScalarModel model(bernoulli_prior(0.02), 0.0011);
  const CouplingMatrix c = triangle_coupling(40, 4);
  coupled_se_options fast, slow;
  fast.max_sweeps = slow.max_sweeps = 40;
  fast.tol = slow.tol = 0.0;
  slow.tabulate = false;
  const CoupledSETrace a = run_coupled_se(model, c, fast), b = run_coupled_se(model, c, slow);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t t = 0; t < a.history.size(); ++t)
    for (std::size_t mu = 0; mu < c.size(); ++mu) EXPECT_NEAR(a.history[t][mu], b.history[t][mu], 1e-9);
}

TEST(CoupledSE, PinnedBlocksStayAtZeroAndHistoryStartsAtV) {
  const ScalarModel model(bernoulli_prior(0.02), 0.0011);
  const CouplingMatrix c = triangle_coupling(40, 4);
  coupled_se_options opts;
  opts.max_sweeps = 3;
  opts.tol = 0.0;
  const CoupledSETrace trace = run_coupled_se(model, c, opts);
  ASSERT_EQ(trace.history.size(), 4u);
  const auto pinned = seed_blocks(c);
  for (std::size_t mu = 0; mu < c.size(); ++mu) {
    EXPECT_EQ(trace.history[0][mu], pinned[mu] ? 0.0 : model.v());
    if (pinned[mu]) {
      EXPECT_EQ(trace.history[3][mu], 0.0);
    }
  }
}

TEST(CoupledSE, WithoutPinningMatchesUncoupledSE) {
  const ScalarModel model(bernoulli_prior(0.02), 0.0011);
  coupled_se_options opts;
  opts.pin = pinning::none;
  opts.max_sweeps = 10;
  opts.tol = 0.0;
  opts.tabulate = false;
  const CoupledSETrace trace = run_coupled_se(model, triangle_coupling(20, 2), opts);
  const SETrace plain = run_se(model, model.v(), {10, 0.0, {}});
  for (std::size_t t = 0; t <= 10; ++t)
    for (double e : trace.history[t]) EXPECT_NEAR(e, plain.values[t], 1e-12);
}
