#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spikelab {

enum class errc {
  negative_prob,
  empty_support,
  non_finite_value,
  quadrature_not_converged,
  domain_error,
  no_bracket,
  bad_window,
  negative_snr,
  too_large,
  not_differentiable,
  bad_config,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::negative_prob: return "NegativeProb";
    case errc::empty_support: return "EmptySupport";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::quadrature_not_converged: return "QuadratureNotConverged";
    case errc::domain_error: return "DomainError";
    case errc::no_bracket: return "NoBracket";
    case errc::bad_window: return "BadWindow";
    case errc::negative_snr: return "NegativeSnr";
    case errc::too_large: return "TooLarge";
    case errc::not_differentiable: return "NotDifferentiable";
    case errc::bad_config: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace spikelab
