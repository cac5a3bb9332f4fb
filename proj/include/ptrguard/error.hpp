#pragma once

#include <stdexcept>
#include <string>

namespace ptrguard {

enum class Errc {
  invalid_argument,
  out_of_region,
  band_straddles_gap,
  root_not_bracketed,
  resonance_pole,
  degenerate_denominator,
  singular_design,
  ill_conditioned,
  degenerate_position,
  not_mirror_symmetric,
  trivially_reflectionless,
  not_converged,
  peak_lost,
  root_lost,
};

/// Validation-class errors come from bad input; the rest are numerical failures.
constexpr bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::out_of_region:
    case Errc::band_straddles_gap:
    case Errc::not_mirror_symmetric:
    case Errc::trivially_reflectionless:
    case Errc::degenerate_position:
    case Errc::singular_design:
      return true;
    default:
      return false;
  }
}

constexpr const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::out_of_region: return "position outside the scattering region";
    case Errc::band_straddles_gap: return "interval straddles a band gap";
    case Errc::root_not_bracketed: return "root not bracketed";
    case Errc::resonance_pole: return "transfer matrix entry m22 vanishes (pole)";
    case Errc::degenerate_denominator: return "degenerate first-order denominator";
    case Errc::singular_design: return "singular design system";
    case Errc::ill_conditioned: return "ill-conditioned design system";
    case Errc::degenerate_position: return "scatterer position carries no weight";
    case Errc::not_mirror_symmetric: return "structure is not mirror symmetric";
    case Errc::trivially_reflectionless: return "structure is trivially reflectionless";
    case Errc::not_converged: return "iteration did not converge";
    case Errc::peak_lost: return "tracked transmission peak lost";
    case Errc::root_lost: return "continuation lost a root";
  }
  return "unknown error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ptrguard
