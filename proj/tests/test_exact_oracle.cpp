#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "spikelab/exact_oracle.hpp"

using namespace spikelab;

namespace {

struct Reference {
  std::vector<double> mean;
  std::vector<double> pair_mean;
  double log_z;  // ln sum_x P0(x) prod_{i<=j} exp(-(w_ij - x_i x_j / sqrt(n))^2 / (2 delta))
};

// Direct Gaussian likelihood on every entry, no completed squares.
Reference brute_force(const OracleInstance& inst, const DiscretePrior& prior) {
  const std::size_t n = inst.n, K = prior.size();
  std::size_t configs = 1;
  for (std::size_t i = 0; i < n; ++i) configs *= K;
  std::vector<double> logw(configs);
  std::vector<std::vector<double>> xs(configs, std::vector<double>(n));
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < configs; ++c) {
    std::size_t code = c;
    double lw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const atom& a = prior.atoms()[code % K];
      code /= K;
      xs[c][i] = a.value;
      lw += std::log(a.prob);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double r = inst.w(i, j) - xs[c][i] * xs[c][j] / std::sqrt(static_cast<double>(n));
        lw -= r * r / (2.0 * inst.delta);
      }
    logw[c] = lw;
    top = std::max(top, lw);
  }
  Reference ref{std::vector<double>(n, 0.0), std::vector<double>(n * n, 0.0), 0.0};
  double total = 0.0;
  for (std::size_t c = 0; c < configs; ++c) {
    const double p = std::exp(logw[c] - top);
    total += p;
    for (std::size_t i = 0; i < n; ++i) {
      ref.mean[i] += p * xs[c][i];
      for (std::size_t j = 0; j < n; ++j) ref.pair_mean[i * n + j] += p * xs[c][i] * xs[c][j];
    }
  }
  for (double& m : ref.mean) m /= total;
  for (double& m : ref.pair_mean) m /= total;
  ref.log_z = top + std::log(total);
  return ref;
}

}  // namespace

TEST(Oracle, MatchesBruteForcePosterior) {
  const DiscretePrior priors[] = {bernoulli_prior(0.3), make_prior({{-1.0, 0.2}, {0.5, 0.5}, {1.5, 0.3}})};
  rng_engine rng(17);
  for (const DiscretePrior& prior : priors) {
    for (double delta : {0.2, 1.0}) {
      const OracleInstance inst = sample_oracle_instance(prior, 6, delta, rng);
      const OracleResult r = exact_posterior(inst, prior);
      const Reference ref = brute_force(inst, prior);
      for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(r.mean[i], ref.mean[i], 1e-12);
      for (std::size_t k = 0; k < 36; ++k) EXPECT_NEAR(r.pair_mean[k], ref.pair_mean[k], 1e-12);
      double constant = 0.0;
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) constant += inst.w(i, j) * inst.w(i, j) / (2.0 * delta);
      EXPECT_NEAR(r.log_partition - constant, ref.log_z, 1e-9 * std::max(1.0, std::abs(ref.log_z)));
    }
  }
}

TEST(Oracle, MutualInformationAgreesWithLikelihoodRatio) {
  const DiscretePrior prior = bernoulli_prior(0.3);
  const std::size_t n = 6, samples = 400;
  const double delta = 0.5;
  rng_engine rng(23);
  std::vector<double> diff(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const OracleInstance inst = sample_oracle_instance(prior, n, delta, rng);
    const Reference ref = brute_force(inst, prior);
    double noise = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) noise += 0.5 * inst.z[i * n + j] * inst.z[i * n + j];
    const double direct = (-noise - ref.log_z) / static_cast<double>(n);
    const double via_oracle = detail::mutual_information_term(prior, exact_posterior(inst, prior), n, delta);
    diff[k] = direct - via_oracle;
  }
  const Estimate e = Estimate::from(diff);
  EXPECT_LE(std::abs(e.mean), 4.0 * e.stderr_);
}

TEST(Oracle, EnforcesBudget) {
  EXPECT_THROW(require_oracle_budget(bernoulli_prior(0.3), 15), error);
  EXPECT_THROW(require_oracle_budget(make_prior({{0.0, 0.2}, {1.0, 0.2}, {2.0, 0.2}, {3.0, 0.4}}), 13), error);
  EXPECT_NO_THROW(require_oracle_budget(bernoulli_prior(0.3), 14));
}

TEST(Oracle, NishimoriIdentities) {
  const NishimoriReport rep = nishimori_check(bernoulli_prior(0.3), 6, 0.5, 600, 5);
  EXPECT_TRUE(rep.first.within(3.5));
  EXPECT_TRUE(rep.second.within(3.5));
  EXPECT_TRUE(rep.square.within(3.5));
}

TEST(Oracle, ImmseRelation) {
  const ImmseReport rep = immse_check(bernoulli_prior(0.3), 6, 0.5, 0.05, 400, 6);
  EXPECT_TRUE(rep.passed());
  EXPECT_LT(rep.fd_error, 1e-5);
  EXPECT_LE(std::abs(rep.exact_residual.mean), 4.0 * rep.exact_residual.stderr_ + rep.fd_error);
}

TEST(Oracle, MatrixVectorInequality) {
  const MmseInequalityReport rep = mmse_inequality_check(bernoulli_prior(0.3), {4, 6, 8}, 0.5, 400, 7);
  EXPECT_TRUE(rep.holds());
  EXPECT_NEAR(rep.theory_c, 0.3 - 0.09, 1e-15);
  ASSERT_EQ(rep.points.size(), 3u);
  for (const auto& p : rep.points) EXPECT_GT(p.overlap_gap, 0.0);
}

TEST(Oracle, EstimateStatistics) {
  const Estimate e = Estimate::from({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.stderr_, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}
