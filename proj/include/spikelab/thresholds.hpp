#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "spikelab/potential.hpp"
#include "spikelab/state_evolution.hpp"

namespace spikelab {

/// SE started from the uninformative point E = v reaches E_good.
inline bool amp_success(const ScalarModel& model, const se_options& opts = {}) {
  const double good = e_good(model, opts);
  if (!is_informative(model.prior, good)) return false;
  const SETrace trace = run_se(model, model.v(), opts);
  return trace.converged && std::abs(trace.fixed_point - good) <= fixed_point_match_tol(model);
}

struct Bracket {
  double lo;  // indicator true
  double hi;  // indicator false
  [[nodiscard]] double width() const noexcept { return hi - lo; }
};

struct ThresholdProbe {
  double delta;
  double e_good;
};

struct threshold_options {
  double rel_tol = 1e-6;
  /// Log-spaced scan, in units of v^2, used when no interval is given.
  double scan_lo = 1e-3;
  double scan_hi = 1e4;
  std::size_t scan_points = 160;
  /// E_good jump, relative to v, that triggers refinement between scan points.
  double jump_tol = 0.05;
  se_options se{};
  potential_options potential{};
};

struct ProbeResult {
  bool ok;
  double e_good;
};

using Indicator = std::function<ProbeResult(double)>;

/// Bisect a verified bracket until its relative width drops below rel_tol.
inline Bracket bisect_threshold(const Indicator& ok, Bracket b, double rel_tol) {
  while (b.hi - b.lo > rel_tol * 0.5 * (b.hi + b.lo)) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (ok(mid).ok) b.lo = mid;
    else b.hi = mid;
  }
  return b;
}

inline Bracket verify_bracket(const Indicator& ok, double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw error(errc::domain_error, "search interval must satisfy 0 < lo < hi");
  const bool a = ok(lo).ok, b = ok(hi).ok;
  if (a == b) throw error(errc::no_bracket, "threshold indicator has the same value at both ends of the interval");
  if (!a) throw error(errc::no_bracket, "threshold indicator is false at the low end of the interval");
  return {lo, hi};
}

namespace detail {

// Both ends succeed but E_good jumps: the good branch vanished in between, so a
// failing window may hide inside. Subdivide until it shows or the jump resolves.
inline std::optional<Bracket> refine_jump(const Indicator& ok, double a, ProbeResult ra, double b, ProbeResult rb,
                                          double jump_tol, double rel_tol) {
  if (std::abs(rb.e_good - ra.e_good) <= jump_tol || b - a <= rel_tol * b) return std::nullopt;
  const double mid = std::sqrt(a * b);
  const ProbeResult rm = ok(mid);
  if (!rm.ok) return Bracket{a, mid};
  if (auto left = refine_jump(ok, a, ra, mid, rm, jump_tol, rel_tol)) return left;
  return refine_jump(ok, mid, rm, b, rb, jump_tol, rel_tol);
}

}  // namespace detail

/// First true -> false flip of the indicator on a log grid, if any.
inline std::optional<Bracket> scan_first_flip(const Indicator& ok, double lo, double hi, std::size_t points,
                                              double jump_tol, double rel_tol) {
  const std::size_t n = std::max<std::size_t>(points, 2);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  double prev = lo;
  ProbeResult rprev = ok(prev);
  if (!rprev.ok) return std::nullopt;
  for (std::size_t k = 1; k < n; ++k) {
    const double cur = k + 1 == n ? hi : lo * std::exp(step * static_cast<double>(k));
    const ProbeResult rcur = ok(cur);
    if (!rcur.ok) return Bracket{prev, cur};
    if (auto hidden = detail::refine_jump(ok, prev, rprev, cur, rcur, jump_tol, rel_tol)) return hidden;
    prev = cur;
    rprev = rcur;
  }
  return std::nullopt;
}

inline Indicator amp_indicator(const DiscretePrior& prior, const se_options& se,
                               std::vector<ThresholdProbe>* probes = nullptr) {
  return [&prior, se, probes](double delta) {
    const ScalarModel model(prior, delta);
    const double good = e_good(model, se);
    if (probes) probes->push_back({delta, good});
    return ProbeResult{amp_success(model, se), good};
  };
}

inline Indicator rs_indicator(const DiscretePrior& prior, const potential_options& popts,
                              std::vector<ThresholdProbe>* probes = nullptr) {
  return [&prior, popts, probes](double delta) {
    const PotentialReport rep = analyze_potential(ScalarModel(prior, delta), popts);
    if (probes) probes->push_back({delta, rep.e_good});
    return ProbeResult{rs_success(rep, prior), rep.e_good};
  };
}

/// Algorithmic threshold inside [lo, hi]; the indicator must flip across it.
inline double delta_amp(const DiscretePrior& prior, double lo, double hi, const threshold_options& opts = {}) {
  const Indicator ok = amp_indicator(prior, opts.se);
  const Bracket b = bisect_threshold(ok, verify_bracket(ok, lo, hi), opts.rel_tol);
  return 0.5 * (b.lo + b.hi);
}

/// Information-theoretic threshold inside [lo, hi].
inline double delta_rs(const DiscretePrior& prior, double lo, double hi, const threshold_options& opts = {}) {
  const Indicator ok = rs_indicator(prior, opts.potential);
  const Bracket b = bisect_threshold(ok, verify_bracket(ok, lo, hi), opts.rel_tol);
  return 0.5 * (b.lo + b.hi);
}

struct ThresholdReport {
  double delta_amp = std::numeric_limits<double>::infinity();
  double delta_rs = std::numeric_limits<double>::infinity();
  std::optional<Bracket> amp_bracket;
  std::optional<Bracket> rs_bracket;
  std::vector<ThresholdProbe> probes;
  /// Stationary points at delta_rs (both branches are near-degenerate there).
  std::vector<StationaryPoint> stationary_points;
};

/// Both thresholds located by scanning from small noise; +inf when no transition is seen.
inline ThresholdReport thresholds(const DiscretePrior& prior, const threshold_options& opts = {}) {
  ThresholdReport rep;
  const double v2 = prior.second_moment() * prior.second_moment();
  if (!(v2 > 0.0)) throw error(errc::domain_error, "prior has zero second moment");
  const double lo = opts.scan_lo * v2, hi = opts.scan_hi * v2;
  const double jump = opts.jump_tol * prior.second_moment();

  const Indicator rs = rs_indicator(prior, opts.potential, &rep.probes);
  if (auto b = scan_first_flip(rs, lo, hi, opts.scan_points, jump, opts.rel_tol)) {
    rep.rs_bracket = bisect_threshold(rs, *b, opts.rel_tol);
    rep.delta_rs = 0.5 * (rep.rs_bracket->lo + rep.rs_bracket->hi);
    rep.stationary_points = stationary_points(ScalarModel(prior, rep.delta_rs), opts.potential).points;
  }

  // The algorithmic threshold never exceeds delta_RS, so the scan stops at the RS bracket.
  const double amp_hi = rep.rs_bracket ? rep.rs_bracket->hi : hi;
  const std::size_t amp_points = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(opts.scan_points * std::log(amp_hi / lo) / std::log(hi / lo))) + 1);
  const Indicator amp = amp_indicator(prior, opts.se, &rep.probes);
  if (auto b = scan_first_flip(amp, lo, amp_hi, amp_points, jump, opts.rel_tol)) {
    rep.amp_bracket = bisect_threshold(amp, *b, opts.rel_tol);
    rep.delta_amp = 0.5 * (rep.amp_bracket->lo + rep.amp_bracket->hi);
  } else if (rep.rs_bracket) {
    // SE succeeds everywhere below delta_RS: the two thresholds coincide.
    rep.amp_bracket = rep.rs_bracket;
    rep.delta_amp = rep.delta_rs;
  }
  return rep;
}

}  // namespace spikelab
