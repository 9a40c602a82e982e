#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "spikelab/error.hpp"
#include "spikelab/quadrature.hpp"

namespace spikelab {

/// w = y + sqrt(delta) z.
struct Awgn {
  double delta;
};

/// Binary edge: P(w = 1 | y) = p + mu y.
struct GraphEdge {
  double p;
  double mu;
};

/// w = 0 with probability 1 - p, otherwise y + sqrt(delta) z.
struct GaussianDropout {
  double p;
  double delta;
};

using OutputChannel = std::variant<Awgn, GraphEdge, GaussianDropout>;

inline std::string channel_name(const OutputChannel& ch) {
  struct {
    std::string operator()(const Awgn&) const { return "awgn"; }
    std::string operator()(const GraphEdge&) const { return "graph_edge"; }
    std::string operator()(const GaussianDropout&) const { return "gaussian_dropout"; }
  } name;
  return std::visit(name, ch);
}

inline void validate(const OutputChannel& ch) {
  struct {
    void operator()(const Awgn& c) const {
      if (!(c.delta > 0.0) || !std::isfinite(c.delta)) throw error(errc::domain_error, "awgn: delta must be positive");
    }
    void operator()(const GraphEdge& c) const {
      if (!(c.p > 0.0 && c.p < 1.0)) throw error(errc::domain_error, "graph_edge: p must lie in (0, 1)");
      if (!(c.mu != 0.0) || !std::isfinite(c.mu)) throw error(errc::domain_error, "graph_edge: mu must be non-zero");
    }
    void operator()(const GaussianDropout& c) const {
      if (!(c.p > 0.0 && c.p < 1.0)) throw error(errc::domain_error, "gaussian_dropout: p must lie in (0, 1)");
      if (!(c.delta > 0.0) || !std::isfinite(c.delta))
        throw error(errc::domain_error, "gaussian_dropout: delta must be positive");
    }
  } check;
  std::visit(check, ch);
}

/// Inverse Fisher information of the channel at y = 0, closed form.
inline double effective_delta(const OutputChannel& ch) {
  validate(ch);
  struct {
    double operator()(const Awgn& c) const { return c.delta; }
    double operator()(const GraphEdge& c) const { return c.p * (1.0 - c.p) / (c.mu * c.mu); }
    double operator()(const GaussianDropout& c) const { return c.delta / c.p; }
  } closed;
  return std::visit(closed, ch);
}

/// Same quantity from a centered difference of log P_out in y, summed (discrete part) or
/// integrated by Gauss-Hermite (density part) against P_out(w | 0).
inline double effective_delta_numeric(const OutputChannel& ch, double step = 1e-5, std::size_t nodes = 61) {
  validate(ch);
  const double h = step;
  auto gaussian_fisher = [&](double delta) {
    const gauss_rule& rule = hermite_rule(nodes);
    const double sd = std::sqrt(delta);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double w = sd * rule.nodes[k];
      const double up = -(w - h) * (w - h) / (2.0 * delta), down = -(w + h) * (w + h) / (2.0 * delta);
      const double score = (up - down) / (2.0 * h);
      acc += rule.weights[k] * score * score;
    }
    return acc;
  };
  struct {
    double h;
    decltype(gaussian_fisher)& gauss;
    double operator()(const Awgn& c) const { return 1.0 / gauss(c.delta); }
    double operator()(const GraphEdge& c) const {
      const double hi = c.p + c.mu * h, lo = c.p - c.mu * h;
      if (!(hi > 0.0 && hi < 1.0 && lo > 0.0 && lo < 1.0))
        throw error(errc::not_differentiable, "graph_edge: likelihood leaves (0, 1) within the difference step");
      const double s1 = (std::log(hi) - std::log(lo)) / (2.0 * h);
      const double s0 = (std::log1p(-hi) - std::log1p(-lo)) / (2.0 * h);
      return 1.0 / (c.p * s1 * s1 + (1.0 - c.p) * s0 * s0);
    }
    double operator()(const GaussianDropout& c) const {
      // The atom at w = 0 has mass 1 - p whatever y is, so its score vanishes.
      return 1.0 / (c.p * gauss(c.delta));
    }
  } numeric{h, gaussian_fisher};
  const double out = std::visit(numeric, ch);
  if (!std::isfinite(out) || !(out > 0.0)) throw error(errc::not_differentiable, "channel has zero Fisher information");
  return out;
}

}  // namespace spikelab
