#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "spikelab/amp.hpp"
#include "spikelab/prior.hpp"

namespace spikelab {

inline constexpr std::size_t oracle_max_n = 14;
inline constexpr std::size_t oracle_max_configs = std::size_t{1} << 24;

/// Small spiked-Wigner draw kept as (s, z) so the noise level can be varied with fixed disorder.
struct OracleInstance {
  std::size_t n = 0;
  std::vector<double> s;
  std::vector<double> z;  // symmetric n x n, diagonal included
  double delta = 0.0;

  [[nodiscard]] double w(std::size_t i, std::size_t j) const {
    return s[i] * s[j] / std::sqrt(static_cast<double>(n)) + std::sqrt(delta) * z[i * n + j];
  }
};

inline OracleInstance sample_oracle_instance(const DiscretePrior& prior, std::size_t n, double delta, rng_engine& rng) {
  OracleInstance inst;
  inst.n = n;
  inst.delta = delta;
  inst.s = sample_signal(prior, n, rng);
  inst.z.resize(n * n);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) inst.z[i * n + j] = inst.z[j * n + i] = normal(rng);
  return inst;
}

struct OracleResult {
  std::vector<double> mean;       // <x_i>
  std::vector<double> pair_mean;  // <x_i x_j>, n x n
  double log_partition = 0.0;     // ln Z with H as below
  double free_energy = 0.0;       // -ln Z / n
  double vmmse = 0.0;             // ||s - <x>||^2 / n
  double mmmse = 0.0;             // ||s s^T - <x x^T>||_F^2 / n^2
  double diagonal_mmse = 0.0;     // sum_i (s_i^2 - <x_i^2>)^2 / n^2
  double q_mean = 0.0;            // <q>, q = x.s / n
  double q2_mean = 0.0;           // <q^2>
};

inline void require_oracle_budget(const DiscretePrior& prior, std::size_t n) {
  if (n == 0 || n > oracle_max_n) throw error(errc::too_large, "exact oracle supports 1 <= n <= 14");
  std::size_t configs = 1;
  for (std::size_t i = 0; i < n; ++i) {
    configs *= prior.size();
    if (configs > oracle_max_configs) throw error(errc::too_large, "support^n exceeds the enumeration budget");
  }
}

/// Exhaustive posterior with weights P0(x) exp(-H(x)),
/// H = sum_{i<=j} [x_i^2 x_j^2 / (2 n delta) - s_i s_j x_i x_j / (n delta) - z_ij x_i x_j / sqrt(n delta)].
inline OracleResult exact_posterior(const OracleInstance& inst, const DiscretePrior& prior) {
  const std::size_t n = inst.n;
  require_oracle_budget(prior, n);
  if (!(inst.delta > 0.0)) throw error(errc::domain_error, "noise variance must be positive");
  const double nd = static_cast<double>(n);
  const double quartic = 1.0 / (2.0 * nd * inst.delta);

  // Bilinear couplings for i <= j.
  std::vector<double> J(n * n);
  const double zscale = 1.0 / std::sqrt(nd * inst.delta);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      J[i * n + j] = inst.s[i] * inst.s[j] / (nd * inst.delta) + inst.z[i * n + j] * zscale;

  const auto atoms = prior.atoms();
  const auto logp = prior.log_probs();
  const std::size_t K = atoms.size();
  std::vector<std::size_t> digit(n, 0);
  std::vector<double> x(n);

  double top = -std::numeric_limits<double>::infinity();
  double total = 0.0, q1 = 0.0, q2 = 0.0;
  std::vector<double> m1(n, 0.0), m2(n * n, 0.0);

  while (true) {
    double logw = 0.0, sq = 0.0, fourth = 0.0, bilinear = 0.0, q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = atoms[digit[i]].value;
      logw += logp[digit[i]];
      const double x2 = x[i] * x[i];
      sq += x2;
      fourth += x2 * x2;
      q += x[i] * inst.s[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = i; j < n; ++j) row += J[i * n + j] * x[j];
      bilinear += x[i] * row;
    }
    logw -= quartic * 0.5 * (sq * sq + fourth) - bilinear;
    q /= nd;

    if (logw > top) {
      // Rescale accumulators to the new maximum.
      const double scale = std::isfinite(top) ? std::exp(top - logw) : 0.0;
      total *= scale;
      q1 *= scale;
      q2 *= scale;
      for (double& a : m1) a *= scale;
      for (double& a : m2) a *= scale;
      top = logw;
    }
    const double weight = std::exp(logw - top);
    total += weight;
    q1 += weight * q;
    q2 += weight * q * q;
    for (std::size_t i = 0; i < n; ++i) {
      const double wx = weight * x[i];
      m1[i] += wx;
      for (std::size_t j = i; j < n; ++j) m2[i * n + j] += wx * x[j];
    }

    // Mixed-radix increment.
    std::size_t pos = 0;
    while (pos < n && ++digit[pos] == K) digit[pos++] = 0;
    if (pos == n) break;
  }

  OracleResult out;
  out.log_partition = top + std::log(total);
  out.free_energy = -out.log_partition / nd;
  out.mean.resize(n);
  out.pair_mean.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.mean[i] = m1[i] / total;
    for (std::size_t j = i; j < n; ++j) out.pair_mean[i * n + j] = out.pair_mean[j * n + i] = m2[i * n + j] / total;
  }
  out.q_mean = q1 / total;
  out.q2_mean = q2 / total;
  for (std::size_t i = 0; i < n; ++i) {
    out.vmmse += (inst.s[i] - out.mean[i]) * (inst.s[i] - out.mean[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = inst.s[i] * inst.s[j] - out.pair_mean[i * n + j];
      out.mmmse += d * d;
    }
    const double dd = inst.s[i] * inst.s[i] - out.pair_mean[i * n + i];
    out.diagonal_mmse += dd * dd;
  }
  out.vmmse /= nd;
  out.mmmse /= nd * nd;
  out.diagonal_mmse /= nd * nd;
  return out;
}

/// Sample mean and its standard error.
struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;

  static Estimate from(const std::vector<double>& xs) {
    Estimate e;
    if (xs.empty()) return e;
    const double k = static_cast<double>(xs.size());
    for (double x : xs) e.mean += x;
    e.mean /= k;
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - e.mean) * (x - e.mean);
      e.stderr_ = std::sqrt(ss / (k - 1.0) / k);
    }
    return e;
  }

  [[nodiscard]] bool within(double sigmas) const { return std::abs(mean) <= sigmas * stderr_; }
};

struct NishimoriReport {
  Estimate first;   // E[S_i <X_i>] - E[<X_i>^2]
  Estimate second;  // E[S_i S_j <X_i X_j>] - E[<X_i X_j>^2], i < j
  Estimate square;  // E[S_i^2] - E[<X_i^2>]
};

inline NishimoriReport nishimori_check(const DiscretePrior& prior, std::size_t n, double delta, std::size_t samples,
                                       std::uint64_t seed) {
  rng_engine rng(seed);
  std::vector<double> a(samples), b(samples), c(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const OracleInstance inst = sample_oracle_instance(prior, n, delta, rng);
    const OracleResult r = exact_posterior(inst, prior);
    double first = 0.0, second = 0.0, square = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      first += inst.s[i] * r.mean[i] - r.mean[i] * r.mean[i];
      square += inst.s[i] * inst.s[i] - r.pair_mean[i * n + i];
      for (std::size_t j = i + 1; j < n; ++j, ++pairs) {
        const double p = r.pair_mean[i * n + j];
        second += inst.s[i] * inst.s[j] * p - p * p;
      }
    }
    a[k] = first / static_cast<double>(n);
    b[k] = pairs ? second / static_cast<double>(pairs) : 0.0;
    c[k] = square / static_cast<double>(n);
  }
  return {Estimate::from(a), Estimate::from(b), Estimate::from(c)};
}

namespace detail {

// I/n for one disorder sample: -ln Z / n + v^2/(4 delta) + (2 E S^4 - v^2)/(4 delta n).
inline double mutual_information_term(const DiscretePrior& prior, const OracleResult& r, std::size_t n, double delta) {
  const double v = prior.second_moment(), nd = static_cast<double>(n);
  return r.free_energy + v * v / (4.0 * delta) + (2.0 * prior.fourth_moment() - v * v) / (4.0 * delta * nd);
}

}  // namespace detail

/// Monte Carlo estimate of I(S; W) / n.
inline Estimate finite_n_mutual_information(const DiscretePrior& prior, std::size_t n, double delta,
                                            std::size_t samples, std::uint64_t seed) {
  rng_engine rng(seed);
  std::vector<double> xs(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const OracleInstance inst = sample_oracle_instance(prior, n, delta, rng);
    xs[k] = detail::mutual_information_term(prior, exact_posterior(inst, prior), n, delta);
  }
  return Estimate::from(xs);
}

struct ImmseReport {
  Estimate derivative;        // (I(lambda + h) - I(lambda - h)) / (2 h n)
  Estimate quarter_mmmse;     // Mmmse / 4 at lambda
  Estimate residual;          // derivative - Mmmse / 4
  Estimate exact_residual;    // derivative - Mmmse / 4 - diagonal term
  double fd_error = 0.0;      // |D(h) - D(2h)|
  double tolerance = 0.0;     // C / n + fd_error + 3 stderr, C = 2 E[S^4]
  [[nodiscard]] bool passed() const { return std::abs(residual.mean) <= tolerance; }
};

/// Finite-difference I-MMSE check in lambda = 1 / delta with common random numbers.
inline ImmseReport immse_check(const DiscretePrior& prior, std::size_t n, double delta, double h, std::size_t samples,
                               std::uint64_t seed) {
  const double lambda = 1.0 / delta;
  if (!(h > 0.0) || !(lambda - 2.0 * h > 0.0)) throw error(errc::domain_error, "step must satisfy 0 < 2h < 1/delta");
  rng_engine rng(seed);
  std::vector<double> d1(samples), d2(samples), quarter(samples), res(samples), exact(samples);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < samples; ++k) {
    OracleInstance inst = sample_oracle_instance(prior, n, delta, rng);
    auto info_at = [&](double lam) {
      inst.delta = 1.0 / lam;
      return detail::mutual_information_term(prior, exact_posterior(inst, prior), n, inst.delta);
    };
    const double ip1 = info_at(lambda + h), im1 = info_at(lambda - h);
    const double ip2 = info_at(lambda + 2 * h), im2 = info_at(lambda - 2 * h);
    inst.delta = delta;
    const OracleResult r = exact_posterior(inst, prior);
    d1[k] = (ip1 - im1) / (2 * h);
    d2[k] = (ip2 - im2) / (4 * h);
    quarter[k] = r.mmmse / 4.0;
    res[k] = d1[k] - quarter[k];
    exact[k] = res[k] - r.diagonal_mmse / 4.0;
  }
  ImmseReport rep;
  rep.derivative = Estimate::from(d1);
  rep.quarter_mmmse = Estimate::from(quarter);
  rep.residual = Estimate::from(res);
  rep.exact_residual = Estimate::from(exact);
  rep.fd_error = std::abs(rep.derivative.mean - Estimate::from(d2).mean);
  rep.tolerance = 2.0 * prior.fourth_moment() / nd + rep.fd_error + 3.0 * rep.residual.stderr_;
  return rep;
}

struct MmseInequalityPoint {
  std::size_t n;
  Estimate vmmse;
  Estimate mmmse;
  double bound;            // v^2 - (v - Vmmse)^2
  double excess;           // Mmmse - bound
  double excess_stderr;    // delta-method standard error of the excess
  double overlap_gap;         // B_n = E<q^2> - (E<q>)^2
  double overlap_gap_stderr;
};

struct MmseInequalityReport {
  std::vector<MmseInequalityPoint> points;
  double theory_c = 0.0;   // E S^4 - v^2
  double fitted_c = 0.0;   // max_n n * excess
  [[nodiscard]] bool holds(double sigmas = 3.0) const {
    for (const auto& p : points)
      if (p.excess > theory_c / static_cast<double>(p.n) + sigmas * p.excess_stderr) return false;
    return true;
  }
};

inline MmseInequalityReport mmse_inequality_check(const DiscretePrior& prior, const std::vector<std::size_t>& sizes,
                                                  double delta, std::size_t samples, std::uint64_t seed) {
  MmseInequalityReport rep;
  const double v = prior.second_moment();
  rep.theory_c = prior.fourth_moment() - v * v;
  rep.fitted_c = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    const std::size_t n = sizes[idx];
    rng_engine rng(seed ^ static_cast<std::uint64_t>(idx));
    std::vector<double> vm(samples), mm(samples), q1(samples), q2(samples);
    for (std::size_t k = 0; k < samples; ++k) {
      const OracleInstance inst = sample_oracle_instance(prior, n, delta, rng);
      const OracleResult r = exact_posterior(inst, prior);
      vm[k] = r.vmmse;
      mm[k] = r.mmmse;
      q1[k] = r.q_mean;
      q2[k] = r.q2_mean;
    }
    MmseInequalityPoint p{};
    p.n = n;
    p.vmmse = Estimate::from(vm);
    p.mmmse = Estimate::from(mm);
    p.bound = v * v - (v - p.vmmse.mean) * (v - p.vmmse.mean);
    p.excess = p.mmmse.mean - p.bound;
    // Gradient of (mm, vm) -> mm - v^2 + (v - vm)^2 is (1, -2 (v - vm)).
    const double g = -2.0 * (v - p.vmmse.mean);
    double cov = 0.0;
    for (std::size_t k = 0; k < samples; ++k) cov += (mm[k] - p.mmmse.mean) * (vm[k] - p.vmmse.mean);
    cov /= static_cast<double>(samples - 1) * static_cast<double>(samples);
    const double var = p.mmmse.stderr_ * p.mmmse.stderr_ + g * g * p.vmmse.stderr_ * p.vmmse.stderr_ + 2.0 * g * cov;
    p.excess_stderr = std::sqrt(std::max(0.0, var));
    const Estimate eq = Estimate::from(q1), eq2 = Estimate::from(q2);
    p.overlap_gap = eq2.mean - eq.mean * eq.mean;
    // Same delta method with gradient (1, -2 E<q>).
    std::vector<double> linear(samples);
    for (std::size_t k = 0; k < samples; ++k) linear[k] = q2[k] - 2.0 * eq.mean * q1[k];
    p.overlap_gap_stderr = Estimate::from(linear).stderr_;
    rep.fitted_c = std::max(rep.fitted_c, static_cast<double>(n) * p.excess);
    rep.points.push_back(p);
  }
  return rep;
}

}  // namespace spikelab
