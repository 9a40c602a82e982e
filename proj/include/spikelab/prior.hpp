#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spikelab/error.hpp"
#include "spikelab/quadrature.hpp"

namespace spikelab {

struct atom {
  double value;
  double prob;
};

/// Default mass moved between the extreme atoms of a zero-mean prior so that
/// state evolution can leave the uninformative point E = v.
inline constexpr double default_bias = 1e-4;

/// Finite-support prior P0 with cached moments. Immutable once built.
class DiscretePrior {
 public:
  /// Normalizes the weights, merges repeated values and drops zero-mass atoms.
  static DiscretePrior make(std::span<const atom> atoms, std::optional<double> bias = std::nullopt) {
    if (atoms.empty()) throw error(errc::empty_support, "prior needs at least one atom");
    std::vector<atom> merged;
    double total = 0.0;
    for (const atom& a : atoms) {
      if (!std::isfinite(a.value) || !std::isfinite(a.prob))
        throw error(errc::non_finite_value, "atom value and probability must be finite");
      if (a.prob < 0.0) throw error(errc::negative_prob, "atom probability is negative");
      if (a.prob == 0.0) continue;
      total += a.prob;
      auto it = std::find_if(merged.begin(), merged.end(), [&](const atom& b) { return b.value == a.value; });
      if (it != merged.end()) it->prob += a.prob;
      else merged.push_back(a);
    }
    if (merged.empty() || !(total > 0.0)) throw error(errc::empty_support, "prior has no mass");
    std::sort(merged.begin(), merged.end(), [](const atom& a, const atom& b) { return a.value < b.value; });
    for (atom& a : merged) a.prob /= total;
    return DiscretePrior(std::move(merged), bias);
  }

  static DiscretePrior make(std::initializer_list<atom> atoms) {
    return make(std::span<const atom>(atoms.begin(), atoms.size()));
  }

  [[nodiscard]] std::span<const atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  /// Second moment v = E[S^2].
  [[nodiscard]] double second_moment() const noexcept { return second_; }
  [[nodiscard]] double fourth_moment() const noexcept { return fourth_; }
  [[nodiscard]] double variance() const noexcept { return std::max(0.0, second_ - mean_ * mean_); }
  [[nodiscard]] double min_value() const noexcept { return atoms_.front().value; }
  [[nodiscard]] double max_value() const noexcept { return atoms_.back().value; }
  [[nodiscard]] double max_abs_value() const noexcept {
    return std::max(std::abs(min_value()), std::abs(max_value()));
  }
  [[nodiscard]] std::span<const double> log_probs() const noexcept { return log_probs_; }
  [[nodiscard]] std::optional<double> bias() const noexcept { return bias_; }
  [[nodiscard]] bool is_dirac() const noexcept { return atoms_.size() == 1; }

 private:
  DiscretePrior(std::vector<atom> atoms, std::optional<double> bias) : atoms_(std::move(atoms)), bias_(bias) {
    for (const atom& a : atoms_) {
      const double x2 = a.value * a.value;
      mean_ += a.prob * a.value;
      second_ += a.prob * x2;
      fourth_ += a.prob * x2 * x2;
      log_probs_.push_back(std::log(a.prob));
    }
  }

  std::vector<atom> atoms_;
  std::vector<double> log_probs_;
  double mean_ = 0.0;
  double second_ = 0.0;
  double fourth_ = 0.0;
  std::optional<double> bias_;
};

inline DiscretePrior make_prior(std::span<const atom> atoms) { return DiscretePrior::make(atoms); }

inline DiscretePrior make_prior(std::initializer_list<atom> atoms) { return DiscretePrior::make(atoms); }

/// Ber(rho) on {0, 1}.
inline DiscretePrior bernoulli_prior(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw error(errc::domain_error, "bernoulli density must lie in (0, 1]");
  return make_prior({{1.0, rho}, {0.0, 1.0 - rho}});
}

/// Two unbalanced communities: sqrt((1-rho)/rho) with mass rho, -sqrt(rho/(1-rho))
/// otherwise. Zero mean and unit variance.
inline DiscretePrior community_prior(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw error(errc::domain_error, "community fraction must lie in (0, 1)");
  return make_prior({{std::sqrt((1.0 - rho) / rho), rho}, {-std::sqrt(rho / (1.0 - rho)), 1.0 - rho}});
}

inline DiscretePrior rademacher_prior() { return make_prior({{1.0, 0.5}, {-1.0, 0.5}}); }

inline DiscretePrior dirac_prior(double value) { return make_prior({{value, 1.0}}); }

/// Moves `eps` of mass from the most negative atom to the most positive one.
inline DiscretePrior with_bias(const DiscretePrior& prior, double eps = default_bias) {
  if (prior.size() < 2) return prior;
  std::vector<atom> atoms(prior.atoms().begin(), prior.atoms().end());
  if (!(eps >= 0.0) || eps >= atoms.front().prob)
    throw error(errc::domain_error, "bias must be non-negative and smaller than the lowest atom's mass");
  atoms.front().prob -= eps;
  atoms.back().prob += eps;
  return DiscretePrior::make(atoms, eps);
}

/// Inverse of with_bias.
inline DiscretePrior without_bias(const DiscretePrior& prior) {
  if (!prior.bias() || prior.size() < 2) return prior;
  std::vector<atom> atoms(prior.atoms().begin(), prior.atoms().end());
  atoms.front().prob += *prior.bias();
  atoms.back().prob -= *prior.bias();
  return DiscretePrior::make(atoms);
}

/// Shannon entropy in nats.
inline double entropy(const DiscretePrior& prior) {
  double h = 0.0;
  for (const atom& a : prior.atoms()) h -= a.prob * std::log(a.prob);
  return h;
}

/// Effective scalar channel y = s + sigma * z. `snr` is 1 / sigma^2.
struct EffectiveNoise {
  double sigma2;
  double snr;

  static EffectiveNoise from_snr(double snr) {
    if (!(snr >= 0.0)) throw error(errc::negative_snr, "snr must be non-negative");
    return {snr > 0.0 ? 1.0 / snr : std::numeric_limits<double>::infinity(), snr};
  }

  /// Sigma(E)^-2 = (v - E) / delta.
  static EffectiveNoise from_error(double error_level, double v, double delta) {
    if (!(delta > 0.0)) throw error(errc::domain_error, "noise variance must be positive");
    if (error_level < 0.0 || error_level > v) throw error(errc::domain_error, "E must lie in [0, v]");
    return from_snr((v - error_level) / delta);
  }
};

struct posterior_moments {
  double mean;
  double var;
};

/// Posterior of X ~ P0 given the natural field h = s * snr + sqrt(snr) * z:
/// weights P0(x) exp(x h - x^2 snr / 2), normalized with log-sum-exp.
inline posterior_moments posterior(const DiscretePrior& prior, double h, double snr) {
  const auto atoms = prior.atoms();
  const auto logp = prior.log_probs();
  if (atoms.size() == 1) return {atoms[0].value, 0.0};

  double top = -std::numeric_limits<double>::infinity();
  // Small fixed buffer; priors in practice have a handful of atoms.
  double stack_buf[16];
  std::vector<double> heap_buf;
  double* ex = stack_buf;
  if (atoms.size() > 16) {
    heap_buf.resize(atoms.size());
    ex = heap_buf.data();
  }
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double x = atoms[k].value;
    ex[k] = logp[k] + x * h - 0.5 * x * x * snr;
    top = std::max(top, ex[k]);
  }
  double z = 0.0, m1 = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double x = atoms[k].value;
    const double wk = std::exp(ex[k] - top);
    z += wk;
    m1 += wk * x;
  }
  const double mean = std::clamp(m1 / z, prior.min_value(), prior.max_value());
  // Centered second moment avoids cancellation when the posterior is sharp.
  double var = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double d = atoms[k].value - mean;
    var += std::exp(ex[k] - top) * d * d;
  }
  return {mean, var / z};
}

inline double posterior_mean(const DiscretePrior& prior, double h, double snr) {
  const auto atoms = prior.atoms();
  if (atoms.size() == 2) {
    // Two atoms: the mean is a logistic in the log-odds of the upper atom.
    const double lo = atoms[0].value, hi = atoms[1].value;
    const auto logp = prior.log_probs();
    const double odds = logp[1] - logp[0] + (hi - lo) * h - 0.5 * (hi * hi - lo * lo) * snr;
    const double up = odds >= 0.0 ? 1.0 / (1.0 + std::exp(-odds)) : std::exp(odds) / (1.0 + std::exp(odds));
    return lo + (hi - lo) * up;
  }
  return posterior(prior, h, snr).mean;
}

inline double posterior_var(const DiscretePrior& prior, double h, double snr) {
  return posterior(prior, h, snr).var;
}

/// Log normalizer ln sum_x P0(x) exp(x h - x^2 snr / 2).
inline double log_partition(const DiscretePrior& prior, double h, double snr) {
  const auto atoms = prior.atoms();
  const auto logp = prior.log_probs();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double x = atoms[k].value;
    top = std::max(top, logp[k] + x * h - 0.5 * x * x * snr);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double x = atoms[k].value;
    acc += std::exp(logp[k] + x * h - 0.5 * x * x * snr - top);
  }
  return top + std::log(acc);
}

/// E_{S,Z}[g(S, z)] with S summed over atoms and Z by the given rule.
template <class G>
double expect_over_signal(const DiscretePrior& prior, const gauss_rule& rule, G&& g) {
  double total = 0.0;
  for (const atom& s : prior.atoms()) {
    double inner = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) inner += rule.weights[i] * g(s.value, rule.nodes[i]);
    total += s.prob * inner;
  }
  return total;
}

/// Scalar Gaussian-channel MMSE E[(S - E[S | h])^2] at the given snr.
inline double mmse(const DiscretePrior& prior, double snr, const quadrature_options& opts = {}) {
  if (!(snr >= 0.0)) throw error(errc::negative_snr, "snr must be non-negative");
  if (prior.is_dirac()) return 0.0;
  if (snr == 0.0) return prior.variance();
  const double root = std::sqrt(snr);
  const double value = integrate_adaptive(
      [&](const gauss_rule& rule) {
        return expect_over_signal(prior, rule, [&](double s, double z) {
          const double err = s - posterior_mean(prior, s * snr + root * z, snr);
          return err * err;
        });
      },
      opts);
  return std::clamp(value, 0.0, prior.variance());
}

/// d mmse / d snr = -E[Var(X | h)^2].
inline double mmse_derivative(const DiscretePrior& prior, double snr, const quadrature_options& opts = {}) {
  if (!(snr >= 0.0)) throw error(errc::negative_snr, "snr must be non-negative");
  if (prior.is_dirac()) return 0.0;
  if (snr == 0.0) return -prior.variance() * prior.variance();
  const double root = std::sqrt(snr);
  const double value = integrate_adaptive(
      [&](const gauss_rule& rule) {
        return expect_over_signal(prior, rule, [&](double s, double z) {
          const double var = posterior_var(prior, s * snr + root * z, snr);
          return var * var;
        });
      },
      opts);
  return -std::max(0.0, value);
}

}  // namespace spikelab
