#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace ptrguard {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

namespace detail {

// Below this |qL| the trigonometric kernels switch to their Taylor series.
inline constexpr double series_cutoff = 1e-4;

}  // namespace detail

/// cos(qL) as a function of q^2, so the branch of q never matters.
inline cplx cos_kernel(cplx q2, double length) {
  const cplx w = q2 * (length * length);
  if (std::abs(w) < detail::series_cutoff * detail::series_cutoff) {
    return 1.0 - w / 2.0 + w * w / 24.0;
  }
  return std::cos(std::sqrt(q2) * length);
}

/// sin(qL)/q, continued through q = 0 where it tends to L.
inline cplx sinc_kernel(cplx q2, double length) {
  const cplx w = q2 * (length * length);
  if (std::abs(w) < detail::series_cutoff * detail::series_cutoff) {
    return length * (1.0 - w / 6.0 + w * w / 120.0);
  }
  const cplx q = std::sqrt(q2);
  return std::sin(q * length) / q;
}

/// sin(z)/z for complex z.
inline cplx sinc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

/// (1 - sinc(v)) / v^2, which tends to 1/6 at the origin.
inline cplx one_minus_sinc_over_sq(cplx v) {
  if (std::abs(v) < 0.5) {
    const cplx v2 = v * v;
    cplx term = 1.0 / 6.0;
    cplx sum = term;
    // term_j = (-1)^j v^{2j} / (2j+3)!
    for (int j = 1; j < 12; ++j) {
      term *= -v2 / (static_cast<double>(2 * j + 2) * static_cast<double>(2 * j + 3));
      sum += term;
    }
    return sum;
  }
  return (1.0 - std::sin(v) / v) / (v * v);
}

/// Chebyshev polynomial of the second kind U_n(x) by the three-term recurrence.
/// U_{-1} = 0 and U_0 = 1, so this is sin((n+1)phi)/sin(phi) with x = cos(phi),
/// including the band-edge limits.
inline cplx chebyshev_u(int n, cplx x) {
  if (n < 0) return (n == -1) ? cplx{0.0} : -chebyshev_u(-n - 2, x);
  cplx prev{0.0};
  cplx cur{1.0};
  for (int j = 0; j < n; ++j) {
    const cplx next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

inline double sq(double x) { return x * x; }

}  // namespace ptrguard
