#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "spikelab/model.hpp"
#include "spikelab/prior.hpp"
#include "spikelab/state_evolution.hpp"

namespace spikelab {

/// E_{S,Z} ln sum_x P0(x) exp(-x^2 r / 2 + x (S r + Z sqrt(r))).
inline double log_partition_average(const DiscretePrior& prior, double snr, const quadrature_options& quad = {}) {
  if (!(snr >= 0.0)) throw error(errc::negative_snr, "snr must be non-negative");
  if (snr == 0.0) return 0.0;
  const double root = std::sqrt(snr);
  return integrate_adaptive(
      [&](const gauss_rule& rule) {
        return expect_over_signal(prior, rule,
                                  [&](double s, double z) { return log_partition(prior, s * snr + root * z, snr); });
      },
      quad);
}

/// Replica-symmetric potential i_RS(E; delta).
inline double i_rs(const ScalarModel& model, double error_level, const quadrature_options& quad = {}) {
  require_error_level(model, error_level);
  const double v = model.v();
  const double gap = v - std::clamp(error_level, 0.0, v);
  return (gap * gap + v * v) / (4.0 * model.delta) - log_partition_average(model.prior, gap / model.delta, quad);
}

/// i_RS shifted by its value at E = v, so that f(v) = 0.
inline double f_rs_u(const ScalarModel& model, double error_level, const quadrature_options& quad = {}) {
  const double v = model.v();
  return i_rs(model, error_level, quad) - v * v / (4.0 * model.delta);
}

/// d i_RS / dE = (E - T_u(E)) / (2 delta).
inline double i_rs_derivative(const ScalarModel& model, double error_level, const quadrature_options& quad = {}) {
  return (error_level - t_u(model, error_level, quad)) / (2.0 * model.delta);
}

/// I(S; sqrt(snr) S + Z) in nats, computed from the channel likelihood ratio.
inline double scalar_mutual_information(const DiscretePrior& prior, double snr, const quadrature_options& quad = {}) {
  if (!(snr >= 0.0)) throw error(errc::negative_snr, "snr must be non-negative");
  if (snr == 0.0 || prior.is_dirac()) return 0.0;
  const double root = std::sqrt(snr);
  const auto atoms = prior.atoms();
  const auto logp = prior.log_probs();
  const double value = integrate_adaptive(
      [&](const gauss_rule& rule) {
        return expect_over_signal(prior, rule, [&](double s, double z) {
          // ln E_x exp(-snr (x - s)^2 / 2 + sqrt(snr) z (x - s)), stabilised by its maximum term.
          double top = -std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < atoms.size(); ++k) {
            const double d = atoms[k].value - s;
            top = std::max(top, logp[k] - 0.5 * snr * d * d + root * z * d);
          }
          double acc = 0.0;
          for (std::size_t k = 0; k < atoms.size(); ++k) {
            const double d = atoms[k].value - s;
            acc += std::exp(logp[k] - 0.5 * snr * d * d + root * z * d - top);
          }
          return -(top + std::log(acc));
        });
      },
      quad);
  return std::max(0.0, value);
}

enum class stationary_kind { minimum, maximum, inflection };

inline const char* to_string(stationary_kind k) {
  switch (k) {
    case stationary_kind::minimum: return "minimum";
    case stationary_kind::maximum: return "maximum";
    case stationary_kind::inflection: return "inflection";
  }
  return "?";
}

struct StationaryPoint {
  double E;
  double value;  // i_RS(E)
  stationary_kind kind;
};

struct potential_options {
  std::size_t grid = 512;
  double root_tol = 1e-12;
  double tie_tol = 1e-10;
  std::size_t max_stationary = 3;
  quadrature_options quad{};
};

struct StationaryScan {
  std::vector<StationaryPoint> points;  // sorted by E
  bool assumption_violation = false;
};

namespace detail {

inline stationary_kind classify(const ScalarModel& model, double root, const quadrature_options& quad) {
  // Sign of i_RS' just left and right of the root; h is small against the grid spacing.
  const double v = model.v();
  const double h = std::max(1e-5 * v, 1e-14);
  const double left = root - h >= 0.0 ? i_rs_derivative(model, root - h, quad) : -1.0;
  const double right = root + h <= v ? i_rs_derivative(model, root + h, quad) : 1.0;
  if (left <= 0.0 && right >= 0.0) return stationary_kind::minimum;
  if (left >= 0.0 && right <= 0.0) return stationary_kind::maximum;
  return stationary_kind::inflection;
}

}  // namespace detail

/// Roots of g(E) = T_u(E) - E on [0, v] by sign-change scan and bisection.
inline StationaryScan stationary_points(const ScalarModel& model, const potential_options& opts = {}) {
  const double v = model.v();
  StationaryScan scan;
  std::vector<double> roots;
  if (model.prior.is_dirac() || v == 0.0) {
    roots.push_back(0.0);
  } else {
    const std::size_t n = std::max<std::size_t>(opts.grid, 2);
    auto g = [&](double e) { return t_u(model, e, opts.quad) - e; };
    std::vector<double> grid(n), values(n);
    for (std::size_t k = 0; k < n; ++k) {
      grid[k] = k + 1 == n ? v : v * static_cast<double>(k) / static_cast<double>(n - 1);
      values[k] = g(grid[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (values[k] == 0.0) {
        roots.push_back(grid[k]);
        continue;
      }
      if (k + 1 < n && values[k + 1] != 0.0 && (values[k] > 0.0) != (values[k + 1] > 0.0)) {
        double lo = grid[k], hi = grid[k + 1];
        const bool lo_positive = values[k] > 0.0;
        while (hi - lo > opts.root_tol) {
          const double mid = 0.5 * (lo + hi);
          const double gm = g(mid);
          if (gm == 0.0) { lo = hi = mid; break; }
          if ((gm > 0.0) == lo_positive) lo = mid;
          else hi = mid;
        }
        roots.push_back(0.5 * (lo + hi));
      }
    }
  }
  for (double r : roots) {
    scan.points.push_back({r, i_rs(model, r, opts.quad), detail::classify(model, r, opts.quad)});
  }
  scan.assumption_violation = scan.points.size() > opts.max_stationary;
  return scan;
}

/// Above this level of (v - E) - m^2 relative to v a fixed point counts as informative.
inline constexpr double informative_margin = 1e-3;

/// For priors carrying an explicit bias, whether E beats the overlap the bias alone provides.
inline bool is_informative(const DiscretePrior& prior, double error_level) {
  if (!prior.bias()) return true;
  const double m = prior.mean();
  return (prior.second_moment() - error_level) - m * m > informative_margin * prior.second_moment();
}

struct PotentialReport {
  std::vector<StationaryPoint> stationary_points;
  double e_good = 0.0;
  double global_min_E = 0.0;
  double global_min_value = 0.0;
  double mmmse = 0.0;
  double vmmse = 0.0;
  double potential_gap = std::numeric_limits<double>::infinity();
  bool at_transition = false;  // two minima tie within tie_tol
  bool assumption_violation = false;
};

inline PotentialReport analyze_potential(const ScalarModel& model, const potential_options& opts = {}) {
  PotentialReport rep;
  StationaryScan scan = stationary_points(model, opts);
  rep.assumption_violation = scan.assumption_violation;
  rep.stationary_points = std::move(scan.points);
  const auto& pts = rep.stationary_points;
  const double v = model.v();

  // SE from 0 climbs monotonically to the smallest fixed point.
  rep.e_good = pts.front().E;
  const double f_good = pts.front().value;

  // The good basin is [0, next root); everything from there to v lies outside it.
  if (pts.size() > 1) {
    double best = i_rs(model, v, opts.quad);
    for (std::size_t k = 1; k < pts.size(); ++k) best = std::min(best, pts[k].value);
    rep.potential_gap = best - f_good;
  }

  std::size_t arg = 0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    if (pts[k].value < pts[arg].value) arg = k;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k != arg && pts[k].kind == stationary_kind::minimum && std::abs(pts[k].value - pts[arg].value) < opts.tie_tol) {
      rep.at_transition = true;
      arg = std::min(arg, k);
    }
  }
  rep.global_min_E = pts[arg].E;
  rep.global_min_value = pts[arg].value;
  rep.vmmse = rep.global_min_E;
  rep.mmmse = v * v - (v - rep.global_min_E) * (v - rep.global_min_E);
  return rep;
}

inline double potential_gap(const ScalarModel& model, const potential_options& opts = {}) {
  return analyze_potential(model, opts).potential_gap;
}

/// Indicator whose sign change defines delta_RS: the good minimum is strictly preferred.
inline bool rs_success(const PotentialReport& rep, const DiscretePrior& prior) {
  if (std::isinf(rep.potential_gap)) return is_informative(prior, rep.e_good);
  return rep.potential_gap > 0.0;
}

inline bool rs_success(const ScalarModel& model, const potential_options& opts = {}) {
  return rs_success(analyze_potential(model, opts), model.prior);
}

struct AsymptoticMmse {
  double mmmse;
  double vmmse;
  bool at_transition = false;
  /// Other branch, emitted when delta sits within the transition window.
  std::optional<double> alternate_vmmse;
  std::optional<double> alternate_mmmse;
};

inline AsymptoticMmse asymptotic_mmse(const ScalarModel& model, double window = 1e-6,
                                      const potential_options& opts = {}) {
  const PotentialReport rep = analyze_potential(model, opts);
  AsymptoticMmse out{rep.mmmse, rep.vmmse, rep.at_transition, std::nullopt, std::nullopt};
  const ScalarModel below(model.prior, model.delta * (1.0 - window));
  const ScalarModel above(model.prior, model.delta * (1.0 + window));
  if (rs_success(below, opts) != rs_success(above, opts)) out.at_transition = true;
  if (out.at_transition) {
    const double v = model.v();
    for (const StationaryPoint& p : rep.stationary_points) {
      if (p.kind == stationary_kind::minimum && p.E != rep.global_min_E) {
        out.alternate_vmmse = p.E;
        out.alternate_mmmse = v * v - (v - p.E) * (v - p.E);
        break;
      }
    }
  }
  return out;
}

}  // namespace spikelab
