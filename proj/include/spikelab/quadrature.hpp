#pragma once

#include <gsl/gsl_integration.h>

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "spikelab/error.hpp"

namespace spikelab {

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1).
struct gauss_rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

inline constexpr double negligible_weight = 1e-25;

inline gauss_rule build_hermite_rule(std::size_t n) {
  // GSL's hermite rule integrates against exp(-x^2); rescale to the unit normal.
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, n, 0.0, 1.0, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw error(errc::quadrature_not_converged, "cannot allocate Gauss-Hermite rule");
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  gauss_rule rule;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = w[i] * inv_sqrt_pi;
    // Far-tail nodes carry no mass at double precision for the bounded or
    // linearly growing integrands used here.
    if (weight < negligible_weight) continue;
    rule.nodes.push_back(std::numbers::sqrt2 * x[i]);
    rule.weights.push_back(weight);
  }
  return rule;
}

}  // namespace detail

/// Cached n-point rule; safe to call concurrently. References stay valid for
/// the lifetime of the program.
inline const gauss_rule& hermite_rule(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<const gauss_rule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<const gauss_rule>(detail::build_hermite_rule(n));
  return *slot;
}

struct quadrature_options {
  std::size_t start_nodes = 61;
  double abs_tol = 1e-10;
  int max_doublings = 6;
};

/// Evaluates `eval(rule)` on rules of 61, 122, 244, ... nodes until two
/// successive results agree to `abs_tol`. Returns the finer result.
/// `max_doublings == 0` evaluates the starting rule only, which keeps the
/// result a smooth function of its parameters.
template <class Eval>
double integrate_adaptive(Eval&& eval, const quadrature_options& opts = {}) {
  std::size_t n = opts.start_nodes;
  double previous = eval(hermite_rule(n));
  if (opts.max_doublings == 0) return previous;
  for (int k = 0; k < opts.max_doublings; ++k) {
    n *= 2;
    const double current = eval(hermite_rule(n));
    if (!std::isfinite(current)) break;
    if (std::abs(current - previous) < opts.abs_tol) return current;
    previous = current;
  }
  throw error(errc::quadrature_not_converged,
              "Gauss-Hermite result still moving after " + std::to_string(n) + " nodes");
}

}  // namespace spikelab
