#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "spikelab/model.hpp"
#include "spikelab/prior.hpp"

namespace spikelab {

struct se_options {
  std::size_t max_iterations = 10'000;
  double tol = 1e-12;
  quadrature_options quad{};
};

/// Scalar state-evolution trajectory E^(0), E^(1), ...
struct SETrace {
  std::vector<double> values;
  bool converged = false;
  double fixed_point = 0.0;
  std::size_t iterations = 0;
  /// |E^(t) - E^(t-1)| at the last step; meaningful when not converged.
  double cauchy_gap = 0.0;
};

/// T_u(E) = mmse((v - E) / delta).
inline double t_u(const ScalarModel& model, double error_level, const quadrature_options& quad = {}) {
  require_error_level(model, error_level);
  return mmse(model.prior, model.snr_at(error_level), quad);
}

/// Derivative of T_u with respect to E.
inline double t_u_derivative(const ScalarModel& model, double error_level, const quadrature_options& quad = {}) {
  require_error_level(model, error_level);
  return -mmse_derivative(model.prior, model.snr_at(error_level), quad) / model.delta;
}

inline SETrace run_se(const ScalarModel& model, double start, const se_options& opts = {}) {
  require_error_level(model, start);
  SETrace trace;
  double current = std::clamp(start, 0.0, model.v());
  trace.values.push_back(current);
  for (std::size_t t = 0; t < opts.max_iterations; ++t) {
    const double next = t_u(model, current, opts.quad);
    trace.values.push_back(next);
    trace.iterations = t + 1;
    trace.cauchy_gap = std::abs(next - current);
    current = next;
    if (trace.cauchy_gap < opts.tol) {
      trace.converged = true;
      break;
    }
  }
  trace.fixed_point = current;
  if (trace.converged) {
    // One guarded Newton step on g(E) = T_u(E) - E; kept only if it shrinks |g|.
    const double g = t_u(model, current, opts.quad) - current;
    const double slope = t_u_derivative(model, current, opts.quad) - 1.0;
    if (g != 0.0 && slope < 0.0) {
      const double polished = std::clamp(current - g / slope, 0.0, model.v());
      const double g_polished = t_u(model, polished, opts.quad) - polished;
      if (std::abs(g_polished) < std::abs(g)) trace.fixed_point = polished;
    }
  }
  return trace;
}

/// Fixed point reached from perfect knowledge, E^(0) = 0.
inline double e_good(const ScalarModel& model, const se_options& opts = {}) {
  if (model.prior.is_dirac()) return 0.0;
  return run_se(model, 0.0, opts).fixed_point;
}

/// Tolerance used to decide that two state-evolution limits coincide.
inline double fixed_point_match_tol(const ScalarModel& model) { return 1e-7 * std::max(model.v(), 1e-12); }

/// True when state evolution started at E converges to e_good.
inline bool in_basin(const ScalarModel& model, double error_level, const se_options& opts = {}) {
  const double good = e_good(model, opts);
  const SETrace trace = run_se(model, error_level, opts);
  return trace.converged && std::abs(trace.fixed_point - good) <= fixed_point_match_tol(model);
}

}  // namespace spikelab
