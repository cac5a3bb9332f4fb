#pragma once

// Long double oracle for field values at a resonance.
//
// Near a narrow-band resonance Re psi Im psi can move by ~1e-10 per ulp of k,
// so a double k is not on resonance to the accuracy the closed forms reach.
// This refines the root and propagates in extended precision.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ptrguard/ptrguard.hpp"

namespace oracle {

using real = long double;
using cx = std::complex<real>;

struct State {
  cx psi;
  cx dpsi;
};

inline State step(const State& s, real k, double height, real length) {
  const cx q = std::sqrt(cx(k * k - static_cast<real>(height)));
  const cx c = std::cos(q * length);
  const cx sn = (std::abs(q) < 1e-12L) ? cx(length) : std::sin(q * length) / q;
  return {c * s.psi + sn * s.dpsi, -q * q * sn * s.psi + c * s.dpsi};
}

inline State kick(const State& s, double c) { return {s.psi, s.dpsi + static_cast<real>(c) * s.psi}; }

/// Half trace of the cell's state matrix.
inline real half_trace(const ptrguard::Profile& cell, real k) {
  State a{1, 0};
  State b{0, 1};
  a = kick(a, cell.delta_at_left);
  b = kick(b, cell.delta_at_left);
  for (const auto& p : cell.pieces) {
    a = kick(step(a, k, p.height, p.length), p.delta_after);
    b = kick(step(b, k, p.height, p.length), p.delta_after);
  }
  return 0.5L * (a.psi + b.dpsi).real();
}

/// Bisection of the PTR condition around the double root.
inline real refine_ptr(const ptrguard::UnitCell& cell, int n_cells, const ptrguard::PtrRecord& ptr) {
  const ptrguard::Profile prof = ptrguard::cell_profile(cell);
  const real target = std::cos(3.14159265358979323846264338327950288L * ptr.n / n_cells);
  auto f = [&](real k) { return half_trace(prof, k) - target; };
  real lo = ptr.k, hi = ptr.k;
  real width = 1e-14L * ptr.k;
  for (int i = 0; i < 20 && f(lo) * f(hi) > 0; ++i, width *= 4) {
    lo = ptr.k - width;
    hi = ptr.k + width;
  }
  if (f(lo) * f(hi) > 0) throw std::runtime_error("oracle: PTR not bracketed");
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    const real mid = 0.5L * (lo + hi);
    if (mid == lo || mid == hi) break;
    ((f(lo) > 0) == (f(mid) > 0) ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

/// Re psi Im psi at xs for left incidence with psi(left end) = 1.
inline std::vector<real> weights(const ptrguard::Profile& prof, real k, const std::vector<double>& xs) {
  const std::size_t n = prof.pieces.size();
  std::vector<State> left(n);
  State s{1, cx(0, k)};
  for (std::size_t i = n; i-- > 0;) {
    const auto& p = prof.pieces[i];
    s = step(kick(s, -p.delta_after), k, p.height, -static_cast<real>(p.length));
    left[i] = s;
  }
  const cx norm = 1.0L / left.front().psi;
  std::vector<real> out;
  for (double x : xs) {
    std::size_t i = 0;
    while (i + 1 < n && x >= prof.pieces[i + 1].x0) ++i;
    const cx v = step(left[i], k, prof.pieces[i].height, static_cast<real>(x) - prof.pieces[i].x0).psi * norm;
    out.push_back(v.real() * v.imag());
  }
  return out;
}

}  // namespace oracle
