#pragma once

// Thin wrappers over Boost.Math bracketing solvers.

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <limits>
#include <utility>

#include "ptrguard/error.hpp"

namespace ptrguard {

/// Root of f in [a, b]; f(a) and f(b) must differ in sign. The bracket also
/// stops shrinking at a few ulps, so abs_tol = 0 asks for full precision.
template <class F>
double find_root(F&& f, double a, double b, double abs_tol = 1e-13) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(Errc::root_not_bracketed, "no sign change on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  std::uintmax_t max_iter = 200;
  auto tol = [abs_tol](double lo, double hi) {
    return std::abs(hi - lo) <= std::max(abs_tol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lo));
  };
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
  if (max_iter >= 200) throw Error(Errc::not_converged, "bracketing solver hit its iteration cap");
  return 0.5 * (lo + hi);
}

/// Local minimum of f on [a, b] (golden section with parabolic steps).
/// Returns {x, f(x)}; location accuracy is limited to ~sqrt(machine epsilon).
template <class F>
std::pair<double, double> minimize(F&& f, double a, double b) {
  std::uintmax_t max_iter = 500;
  return boost::math::tools::brent_find_minima(f, a, b, 40, max_iter);
}

}  // namespace ptrguard
