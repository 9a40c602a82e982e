#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "spikelab/prior.hpp"

namespace spikelab {

/// Cubic Hermite table of mmse on [0, snr_max], refined until the interpolant
/// matches direct quadrature at every interval midpoint.
class MmseTable {
 public:
  struct options {
    std::size_t start_intervals = 512;
    std::size_t max_intervals = 1 << 15;
    double abs_tol = 1e-11;
    /// Tighter than the default so that node-count switches do not show up as jumps.
    quadrature_options quad{244, 1e-13, 6};
  };

  /// Empty when the tolerance cannot be met within max_intervals.
  static std::optional<MmseTable> build(const DiscretePrior& prior, double snr_max, const options& opts) {
    if (!(snr_max > 0.0) || !std::isfinite(snr_max)) throw error(errc::domain_error, "table range must be positive");
    for (std::size_t n = opts.start_intervals; n <= opts.max_intervals; n *= 2) {
      MmseTable t;
      t.h_ = snr_max / static_cast<double>(n);
      t.snr_max_ = snr_max;
      t.value_.resize(n + 1);
      t.slope_.resize(n + 1);
      for (std::size_t k = 0; k <= n; ++k) {
        const double x = t.h_ * static_cast<double>(k);
        t.value_[k] = mmse(prior, x, opts.quad);
        t.slope_[k] = mmse_derivative(prior, x, opts.quad);
      }
      double worst = 0.0;
      for (std::size_t k = 0; k < n && worst <= opts.abs_tol; ++k) {
        const double x = t.h_ * (static_cast<double>(k) + 0.5);
        worst = std::max(worst, std::abs(t(x) - mmse(prior, x, opts.quad)));
      }
      t.max_error_ = worst;
      if (worst <= opts.abs_tol) return t;
    }
    return std::nullopt;
  }

  static std::optional<MmseTable> build(const DiscretePrior& prior, double snr_max) {
    return build(prior, snr_max, options{});
  }

  [[nodiscard]] double operator()(double snr) const noexcept {
    const double u = std::clamp(snr, 0.0, snr_max_) / h_;
    const std::size_t last = value_.size() - 2;
    const std::size_t k = std::min(static_cast<std::size_t>(u), last);
    const double t = u - static_cast<double>(k);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * value_[k] + (t3 - 2 * t2 + t) * h_ * slope_[k] +
           (-2 * t3 + 3 * t2) * value_[k + 1] + (t3 - t2) * h_ * slope_[k + 1];
  }

  [[nodiscard]] double snr_max() const noexcept { return snr_max_; }
  [[nodiscard]] std::size_t intervals() const noexcept { return value_.size() - 1; }
  /// Largest midpoint deviation seen while validating.
  [[nodiscard]] double max_error() const noexcept { return max_error_; }

 private:
  MmseTable() = default;
  double h_ = 0.0;
  double snr_max_ = 0.0;
  double max_error_ = 0.0;
  std::vector<double> value_;
  std::vector<double> slope_;
};

}  // namespace spikelab
