#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "spikelab/mmse_table.hpp"
#include "spikelab/model.hpp"
#include "spikelab/potential.hpp"
#include "spikelab/state_evolution.hpp"

namespace spikelab {

/// Banded circulant coupling over L+1 blocks; entries depend on the ring distance only.
class CouplingMatrix {
 public:
  CouplingMatrix(std::size_t L, std::size_t w, std::vector<double> kernel)
      : L_(L), w_(w), kernel_(std::move(kernel)) {
    if (kernel_.size() != w_ + 1) throw error(errc::bad_window, "kernel length must be w + 1");
    if (2 * w_ > L_) throw error(errc::bad_window, "window must satisfy 2w <= L");
  }

  [[nodiscard]] std::size_t size() const noexcept { return L_ + 1; }
  [[nodiscard]] std::size_t L() const noexcept { return L_; }
  [[nodiscard]] std::size_t window() const noexcept { return w_; }

  /// Entry for a signed offset on the line; zero outside the window.
  [[nodiscard]] double at_offset(long d) const noexcept {
    const auto a = static_cast<std::size_t>(d < 0 ? -d : d);
    return a <= w_ ? kernel_[a] : 0.0;
  }

  [[nodiscard]] std::size_t ring_distance(std::size_t mu, std::size_t nu) const noexcept {
    const std::size_t d = mu > nu ? mu - nu : nu - mu;
    return std::min(d, size() - d);
  }

  [[nodiscard]] double operator()(std::size_t mu, std::size_t nu) const noexcept {
    const std::size_t d = ring_distance(mu, nu);
    return d <= w_ ? kernel_[d] : 0.0;
  }

  [[nodiscard]] double sup_entry() const noexcept { return *std::max_element(kernel_.begin(), kernel_.end()); }

  /// DFT of one row; real because the kernel is symmetric.
  [[nodiscard]] std::vector<double> row_spectrum() const {
    const std::size_t n = size();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      double acc = kernel_[0];
      for (std::size_t d = 1; d <= w_; ++d)
        acc += 2.0 * kernel_[d] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * d) / static_cast<double>(n));
      out[k] = acc;
    }
    return out;
  }

  [[nodiscard]] std::vector<std::vector<double>> dense() const {
    std::vector<std::vector<double>> m(size(), std::vector<double>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) m[i][j] = (*this)(i, j);
    return m;
  }

 private:
  std::size_t L_;
  std::size_t w_;
  std::vector<double> kernel_;
};

/// Lambda_{mu nu} = (1 - |mu - nu| / (w + 1)) / (w + 1) inside the window.
inline CouplingMatrix triangle_coupling(std::size_t L, std::size_t w) {
  if (2 * w > L) throw error(errc::bad_window, "window must satisfy 0 <= w <= L/2");
  std::vector<double> kernel(w + 1);
  const double base = static_cast<double>(w + 1);
  for (std::size_t d = 0; d <= w; ++d) kernel[d] = (1.0 - static_cast<double>(d) / base) / base;
  return CouplingMatrix(L, w, std::move(kernel));
}

/// Values of E outside [0, L] when the chain is open instead of closed into a ring.
struct ChainBoundary {
  double left;
  double right;
};

/// Seed blocks {0 .. w-1} and {L-w .. L}, contiguous on the ring.
inline std::vector<char> seed_blocks(const CouplingMatrix& coupling) {
  std::vector<char> pinned(coupling.size(), 0);
  const std::size_t L = coupling.L(), w = coupling.window();
  for (std::size_t mu = 0; mu < w; ++mu) pinned[mu] = 1;
  for (std::size_t mu = L - w; mu <= L; ++mu) pinned[mu] = 1;
  return pinned;
}

namespace detail {

// E_nu with nu possibly outside [0, L].
inline double profile_at(std::span<const double> values, long nu, const std::optional<ChainBoundary>& chain) {
  const long n = static_cast<long>(values.size());
  if (!chain) return values[static_cast<std::size_t>(((nu % n) + n) % n)];
  if (nu < 0) return chain->left;
  if (nu >= n) return chain->right;
  return values[static_cast<std::size_t>(nu)];
}

// sum_nu Lambda_{mu nu} E_nu for any integer mu.
inline double window_average(std::span<const double> values, const CouplingMatrix& coupling, long mu,
                             const std::optional<ChainBoundary>& chain) {
  const long w = static_cast<long>(coupling.window());
  double acc = 0.0;
  for (long d = -w; d <= w; ++d) acc += coupling.at_offset(d) * profile_at(values, mu + d, chain);
  return acc;
}

inline double snr_from_average(const ScalarModel& model, double average) {
  const double snr = (model.v() - average) / model.delta;
  if (snr < -1e-12 * model.v() / model.delta) throw error(errc::negative_snr, "profile exceeds v on a coupling window");
  return std::max(0.0, snr);
}

}  // namespace detail

/// Sigma_mu^-2 = (v - sum_nu Lambda_{mu nu} E_nu) / delta.
inline double sigma_mu(std::span<const double> values, const CouplingMatrix& coupling, const ScalarModel& model,
                       std::size_t mu, const std::optional<ChainBoundary>& chain = std::nullopt) {
  if (values.size() != coupling.size()) throw error(errc::domain_error, "profile length must be L + 1");
  return detail::snr_from_average(model, detail::window_average(values, coupling, static_cast<long>(mu), chain));
}

/// One synchronous application of the coupled operator; pinned blocks are set to 0.
inline std::vector<double> t_c(std::span<const double> values, const CouplingMatrix& coupling,
                               const ScalarModel& model, std::span<const char> pinned,
                               const std::optional<ChainBoundary>& chain = std::nullopt,
                               const quadrature_options& quad = {}) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t mu = 0; mu < values.size(); ++mu)
    if (pinned.empty() || !pinned[mu]) out[mu] = mmse(model.prior, sigma_mu(values, coupling, model, mu, chain), quad);
  return out;
}

enum class pinning { seed, none };

struct coupled_se_options {
  std::size_t max_sweeps = 100'000;
  double tol = 1e-10;
  /// Blocks whose window average moved less than this since their last evaluation reuse it.
  double reuse_tol = 1e-11;
  /// Keep every k-th sweep in the history (the last profile is always kept); 0 keeps none.
  std::size_t history_stride = 1;
  pinning pin = pinning::seed;
  std::optional<ChainBoundary> chain;
  /// Stop as soon as every block is at or below this value.
  std::optional<double> stop_below;
  /// Evaluate T_c through a validated interpolation table of mmse instead of quadrature.
  bool tabulate = true;
  /// Initial profile for free blocks; defaults to v everywhere.
  std::optional<std::vector<double>> initial;
  quadrature_options quad{};
};

struct CoupledProfile {
  std::vector<double> values;
  std::vector<char> pinned;
  bool converged = false;

  [[nodiscard]] double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

struct CoupledSETrace {
  std::vector<std::vector<double>> history;
  std::vector<std::size_t> history_sweeps;
  CoupledProfile profile;
  std::size_t sweeps = 0;
  std::size_t evaluations = 0;
  bool tabulated = false;
  bool reached_target = false;
  double cauchy_gap = 0.0;
};

/// Jacobi iteration of the coupled state evolution from the all-v profile.
inline CoupledSETrace run_coupled_se(const ScalarModel& model, const CouplingMatrix& coupling,
                                     const coupled_se_options& opts = {}) {
  const std::size_t n = coupling.size();
  CoupledSETrace trace;
  CoupledProfile& prof = trace.profile;
  prof.pinned = opts.pin == pinning::seed ? seed_blocks(coupling) : std::vector<char>(n, 0);
  if (opts.initial) {
    if (opts.initial->size() != n) throw error(errc::domain_error, "initial profile length must be L + 1");
    prof.values = *opts.initial;
  } else {
    prof.values.assign(n, model.v());
  }
  for (std::size_t mu = 0; mu < n; ++mu) {
    if (prof.pinned[mu]) prof.values[mu] = 0.0;
    require_error_level(model, prof.values[mu]);
  }

  auto record = [&](std::size_t sweep) {
    if (opts.history_stride == 0) return;
    if (!trace.history_sweeps.empty() && trace.history_sweeps.back() == sweep) return;
    trace.history.push_back(prof.values);
    trace.history_sweeps.push_back(sweep);
  };
  record(0);

  std::optional<MmseTable> table;
  if (opts.tabulate && !model.prior.is_dirac()) {
    table = MmseTable::build(model.prior, model.v() / model.delta);
  }
  trace.tabulated = table.has_value();
  auto local_mmse = [&](double snr) { return table ? (*table)(snr) : mmse(model.prior, snr, opts.quad); };

  // Blocks whose effective snr did not move reuse their last mmse value.
  std::vector<double> last_snr(n, -1.0), last_out(n, 0.0), next(n, 0.0);
  auto reached = [&] { return opts.stop_below && prof.max_value() <= *opts.stop_below; };

  for (std::size_t sweep = 1; sweep <= opts.max_sweeps && !trace.reached_target; ++sweep) {
    double gap = 0.0;
    for (std::size_t mu = 0; mu < n; ++mu) {
      if (prof.pinned[mu]) {
        next[mu] = 0.0;
        continue;
      }
      const double snr = sigma_mu(prof.values, coupling, model, mu, opts.chain);
      // A shift of the window average below reuse_tol moves T_c by far less than tol.
      if (last_snr[mu] < 0.0 || std::abs(snr - last_snr[mu]) * model.delta > opts.reuse_tol) {
        last_snr[mu] = snr;
        last_out[mu] = local_mmse(snr);
        ++trace.evaluations;
      }
      next[mu] = last_out[mu];
      gap = std::max(gap, std::abs(next[mu] - prof.values[mu]));
    }
    prof.values.swap(next);
    trace.sweeps = sweep;
    trace.cauchy_gap = gap;
    if (opts.history_stride && sweep % opts.history_stride == 0) record(sweep);
    if (gap < opts.tol) prof.converged = true;
    if (reached()) trace.reached_target = true;
    if (prof.converged) break;
  }
  record(trace.sweeps);
  return trace;
}

struct coupled_threshold_options {
  double rel_tol = 1e-4;
  /// Success means every block ends at most this far above E_good.
  double success_tol = 1e-6;
  coupled_se_options se{};
};

/// Coupled SE from v ends at or below E_good everywhere.
inline bool coupled_amp_success(const ScalarModel& model, const CouplingMatrix& coupling,
                                const coupled_threshold_options& opts = {}) {
  const double target = e_good(model) + opts.success_tol;
  coupled_se_options se = opts.se;
  se.history_stride = 0;
  se.stop_below = target;
  const CoupledSETrace trace = run_coupled_se(model, coupling, se);
  return trace.reached_target || (trace.profile.converged && trace.profile.max_value() <= target);
}

/// Largest delta in [lo, hi] for which coupled SE reaches E_good, by bisection.
inline double delta_amp_coupled(const DiscretePrior& prior, std::size_t w, std::size_t L, double lo, double hi,
                                const coupled_threshold_options& opts = {}) {
  const CouplingMatrix coupling = triangle_coupling(L, w);
  auto ok = [&](double delta) { return coupled_amp_success(ScalarModel(prior, delta), coupling, opts); };
  if (!(lo > 0.0 && hi > lo)) throw error(errc::domain_error, "search interval must satisfy 0 < lo < hi");
  const bool a = ok(lo), b = ok(hi);
  if (a == b || !a) throw error(errc::no_bracket, "coupled threshold indicator does not flip across the interval");
  while (hi - lo > opts.rel_tol * 0.5 * (hi + lo)) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Site term of the coupled potential at block mu (any integer for open chains).
inline double coupled_site_term(std::span<const double> values, const CouplingMatrix& coupling,
                                const ScalarModel& model, long mu, const std::optional<ChainBoundary>& chain,
                                const quadrature_options& quad) {
  const double v = model.v();
  const double average = window_average(values, coupling, mu, chain);
  const double quadratic = (v - profile_at(values, mu, chain)) * (v - average) / (4.0 * model.delta);
  return quadratic - log_partition_average(model.prior, snr_from_average(model, average), quad);
}

}  // namespace detail

/// f_c(E) = sum_{mu nu} Lambda (v - E_mu)(v - E_nu) / (4 delta) - sum_mu E ln Z(Sigma_mu).
inline double coupled_potential(std::span<const double> values, const CouplingMatrix& coupling,
                                const ScalarModel& model, const std::optional<ChainBoundary>& chain = std::nullopt,
                                const quadrature_options& quad = {}) {
  if (values.size() != coupling.size()) throw error(errc::domain_error, "profile length must be L + 1");
  double total = 0.0;
  for (std::size_t mu = 0; mu < values.size(); ++mu)
    total += detail::coupled_site_term(values, coupling, model, static_cast<long>(mu), chain, quad);
  return total;
}

/// [S(E)]_mu = E_{mu-1}; the first block takes `first` (the last block on a ring).
inline std::vector<double> shift_profile(std::span<const double> values, double first) {
  std::vector<double> out(values.size());
  out[0] = first;
  for (std::size_t mu = 1; mu < values.size(); ++mu) out[mu] = values[mu - 1];
  return out;
}

/// f_c(S(E)) - f_c(E), evaluated directly.
inline double shift_difference(std::span<const double> values, const CouplingMatrix& coupling,
                               const ScalarModel& model, const std::optional<ChainBoundary>& chain = std::nullopt,
                               const quadrature_options& quad = {}) {
  const double first = chain ? chain->left : values.back();
  const std::vector<double> shifted = shift_profile(values, first);
  return coupled_potential(shifted, coupling, model, chain, quad) - coupled_potential(values, coupling, model, chain, quad);
}

/// Telescoped form of the shift difference on an open chain: site term at -1 minus site term at L.
/// Equals shift_difference whenever E_L matches the right boundary value.
inline double shift_difference_boundary(std::span<const double> values, const CouplingMatrix& coupling,
                                        const ScalarModel& model, const ChainBoundary& chain,
                                        const quadrature_options& quad = {}) {
  const std::optional<ChainBoundary> c = chain;
  return detail::coupled_site_term(values, coupling, model, -1, c, quad) -
         detail::coupled_site_term(values, coupling, model, static_cast<long>(values.size()) - 1, c, quad);
}

/// Saturated profile of a unimodal fixed point: E_good up to the last block still at or below it,
/// the fixed point itself up to its maximum, then flat at the maximum.
inline std::vector<double> saturated_profile(std::span<const double> fixed_point, double good) {
  const std::size_t n = fixed_point.size();
  const std::size_t mu_max =
      static_cast<std::size_t>(std::max_element(fixed_point.begin(), fixed_point.end()) - fixed_point.begin());
  std::size_t start = 0;  // first block after mu_*
  for (std::size_t mu = 0; mu <= mu_max; ++mu)
    if (fixed_point[mu] <= good) start = mu + 1;
  std::vector<double> out(n);
  double running = good;
  for (std::size_t mu = 0; mu < n; ++mu) {
    if (mu < start) out[mu] = good;
    else if (mu <= mu_max) out[mu] = running = std::max(running, fixed_point[mu]);
    else out[mu] = fixed_point[mu_max];
  }
  return out;
}

}  // namespace spikelab
