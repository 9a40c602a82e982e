#pragma once

#include <cmath>

#include "spikelab/error.hpp"
#include "spikelab/prior.hpp"

namespace spikelab {

/// Prior plus AWGN variance of the spiked Wigner observation.
struct ScalarModel {
  DiscretePrior prior;
  double delta;

  ScalarModel(DiscretePrior p, double d) : prior(std::move(p)), delta(d) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw error(errc::domain_error, "noise variance must be positive");
  }

  [[nodiscard]] double v() const noexcept { return prior.second_moment(); }

  /// Sigma(E)^-2 = (v - E) / delta, clamped at 0 for E marginally above v.
  [[nodiscard]] double snr_at(double error_level) const noexcept {
    return std::max(0.0, (v() - error_level) / delta);
  }
};

inline void require_error_level(const ScalarModel& model, double error_level) {
  // Allow round-off above v from callers that compute E = v - (v - E).
  const double slack = 1e-14 * std::max(1.0, model.v());
  if (!(error_level >= -slack && error_level <= model.v() + slack))
    throw error(errc::domain_error, "E must lie in [0, v]");
}

}  // namespace spikelab
