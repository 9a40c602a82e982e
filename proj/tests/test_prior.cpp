#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spikelab/prior.hpp"

using namespace spikelab;

TEST(Prior, NormalizesAndMergesAtoms) {
  const DiscretePrior p = make_prior({{1.0, 2.0}, {0.0, 1.0}, {1.0, 1.0}, {3.0, 0.0}});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p.atoms()[0].value, 0.0);
  EXPECT_DOUBLE_EQ(p.atoms()[0].prob, 0.25);
  EXPECT_DOUBLE_EQ(p.atoms()[1].prob, 0.75);
  EXPECT_DOUBLE_EQ(p.mean(), 0.75);
  EXPECT_DOUBLE_EQ(p.second_moment(), 0.75);
  EXPECT_DOUBLE_EQ(p.variance(), 0.75 - 0.5625);
}

TEST(Prior, RejectsBadInput) {
  EXPECT_THROW(make_prior(std::span<const atom>{}), error);
  EXPECT_THROW(make_prior({{1.0, -0.1}, {0.0, 1.0}}), error);
  EXPECT_THROW(make_prior({{NAN, 0.5}}), error);
  EXPECT_THROW(make_prior({{1.0, 0.0}}), error);
  EXPECT_THROW(bernoulli_prior(0.0), error);
  EXPECT_THROW(community_prior(1.0), error);
}

TEST(Prior, CommunityPriorIsStandardized) {
  for (double rho : {0.05, 0.3, 0.5}) {
    const DiscretePrior p = community_prior(rho);
    EXPECT_NEAR(p.mean(), 0.0, 1e-15);
    EXPECT_NEAR(p.second_moment(), 1.0, 1e-14);
  }
}

TEST(Prior, BiasRoundTrip) {
  const DiscretePrior base = community_prior(0.3);
  const DiscretePrior biased = with_bias(base);
  ASSERT_TRUE(biased.bias().has_value());
  EXPECT_DOUBLE_EQ(*biased.bias(), default_bias);
  EXPECT_GT(biased.mean(), 0.0);
  const DiscretePrior back = without_bias(biased);
  EXPECT_FALSE(back.bias().has_value());
  for (std::size_t k = 0; k < base.size(); ++k) EXPECT_NEAR(back.atoms()[k].prob, base.atoms()[k].prob, 1e-15);
  EXPECT_THROW(with_bias(base, 0.9), error);
}

TEST(Prior, EntropyOfBernoulli) {
  EXPECT_NEAR(entropy(bernoulli_prior(0.1)), 0.325083, 1e-6);
  EXPECT_NEAR(entropy(rademacher_prior()), std::log(2.0), 1e-15);
}

TEST(Prior, TwoAtomFastPathMatchesGeneralPosterior) {
  const DiscretePrior p = make_prior({{-0.7, 0.2}, {1.3, 0.8}});
  for (double h : {-30.0, -1.0, 0.0, 0.4, 25.0})
    for (double snr : {0.0, 0.5, 10.0}) EXPECT_NEAR(posterior_mean(p, h, snr), posterior(p, h, snr).mean, 1e-14);
}

TEST(Prior, PosteriorOfDiracIsExact) {
  const posterior_moments m = posterior(dirac_prior(2.0), 5.0, 1.0);
  EXPECT_EQ(m.mean, 2.0);
  EXPECT_EQ(m.var, 0.0);
  EXPECT_EQ(mmse(dirac_prior(2.0), 3.0), 0.0);
}

TEST(Prior, MmseEndPoints) {
  const DiscretePrior p = bernoulli_prior(0.3);
  EXPECT_DOUBLE_EQ(mmse(p, 0.0), p.variance());
  EXPECT_LT(mmse(p, 1e4), 1e-10);
  EXPECT_THROW(mmse(p, -1.0), error);
}

TEST(Prior, RademacherMmseAgainstMonteCarlo) {
  // Independent Monte Carlo estimate of E(S - tanh(S + Z))^2 with standard error 3.38e-4.
  const double quadrature = mmse(rademacher_prior(), 1.0);
  EXPECT_NEAR(quadrature, 0.44959950920667, 1e-10);
  EXPECT_NEAR(quadrature, 0.4490782573, 3 * 3.38e-4);
}

TEST(Prior, MmseIsDecreasingAndDerivativeMatchesDifferences) {
  const DiscretePrior p = make_prior({{-1.0, 0.3}, {0.0, 0.4}, {2.0, 0.3}});
  double prev = mmse(p, 0.0);
  for (double snr : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    const double m = mmse(p, snr);
    EXPECT_LT(m, prev);
    prev = m;
    const double h = 1e-4 * snr;
    const double fd = (mmse(p, snr + h) - mmse(p, snr - h)) / (2 * h);
    EXPECT_NEAR(mmse_derivative(p, snr), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Prior, LogPartitionIsStable) {
  const DiscretePrior p = bernoulli_prior(0.02);
  const double big = log_partition(p, 1e6, 1e3);
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_NEAR(big, std::log(0.02) + 1e6 - 500.0, 1e-6);
}
