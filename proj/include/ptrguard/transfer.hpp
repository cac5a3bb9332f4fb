#pragma once

// Transfer matrices for piecewise-constant potentials with point scatterers.
//
// Propagation runs in the (psi, psi') basis, which stays well conditioned
// through evanescent segments. The traveling-wave basis is only used at the
// leads: a state is written as the local values (psi_+, psi_-) of the right-
// and left-going waves, psi = psi_+ + psi_-, psi' = ik (psi_+ - psi_-).
// A traveling-wave matrix maps left-side amplitudes to right-side ones, so
// for incidence from the left t = 1/m22 and r = -m21/m22.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "ptrguard/error.hpp"
#include "ptrguard/numeric.hpp"
#include "ptrguard/potential.hpp"

namespace ptrguard {

enum class Basis { state, traveling };

struct TransferMatrix {
  cplx m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};
  Basis basis = Basis::state;
  cplx lead_k{0.0};  ///< wavenumber of the traveling basis

  static TransferMatrix identity(Basis b = Basis::state, cplx k = 0.0) { return {1.0, 0.0, 0.0, 1.0, b, k}; }

  cplx det() const { return m11 * m22 - m12 * m21; }
  cplx trace() const { return m11 + m22; }

  /// Inverse of a unimodular matrix.
  TransferMatrix unimodular_inverse() const { return {m22, -m12, -m21, m11, basis, lead_k}; }

  double max_abs() const {
    return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
  }

  friend TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22, a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22, a.basis, a.lead_k};
  }

  std::array<cplx, 2> apply(std::array<cplx, 2> v) const {
    return {m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1]};
  }
};

struct ScatteringCoefficients {
  cplx t;
  cplx r;
  double T = 0.0;
  double R = 0.0;
};

struct BlochPhase {
  cplx phi;
  bool in_passband = false;
};

inline constexpr double passband_tolerance = 1e-10;

// ---------------------------------------------------------------------------
// Elementary matrices (psi/psi' basis)

/// Propagation through a constant segment: [[cos qL, sin(qL)/q], [-q^2 sin(qL)/q, cos qL]].
inline TransferMatrix segment_matrix(const Segment& seg, cplx k) {
  const cplx q2 = k * k - seg.height;
  const cplx c = cos_kernel(q2, seg.length);
  const cplx s = sinc_kernel(q2, seg.length);
  return {c, s, -q2 * s, c, Basis::state, 0.0};
}

/// Point scatterer: psi continuous, psi' jumps by c psi.
inline TransferMatrix delta_matrix(double c_eff) { return {1.0, 0.0, c_eff, 1.0, Basis::state, 0.0}; }

/// Conjugate a (psi, psi') matrix into the traveling-wave basis at wavenumber k.
inline TransferMatrix to_traveling(const TransferMatrix& p, cplx k) {
  const cplx ik = I * k;
  const cplx a = p.m11 + ik * p.m12;
  const cplx b = p.m11 - ik * p.m12;
  const cplx c = (p.m21 + ik * p.m22) / ik;
  const cplx d = (p.m21 - ik * p.m22) / ik;
  return {0.5 * (a + c), 0.5 * (b + d), 0.5 * (a - c), 0.5 * (b - d), Basis::traveling, k};
}

/// Local wave amplitudes (psi_+, psi_-) of a (psi, psi') state.
inline std::array<cplx, 2> wave_amplitudes(std::array<cplx, 2> state, cplx k) {
  const cplx ik = I * k;
  return {0.5 * (state[0] + state[1] / ik), 0.5 * (state[0] - state[1] / ik)};
}

// ---------------------------------------------------------------------------
// Structures

/// State-basis matrix from the left end of the profile (before the left-end
/// scatterer) to its right end (after the last scatterer).
inline TransferMatrix profile_state_matrix(const Profile& prof, cplx k) {
  TransferMatrix m = delta_matrix(prof.delta_at_left);
  for (const auto& p : prof.pieces) {
    m = segment_matrix({p.length, p.height}, k) * m;
    if (p.delta_after != 0.0) m = delta_matrix(p.delta_after) * m;
  }
  return m;
}

inline TransferMatrix profile_matrix(const Profile& prof, cplx k) { return to_traveling(profile_state_matrix(prof, k), k); }

inline TransferMatrix structure_matrix(const StructureSpec& spec, cplx k) { return profile_matrix(flatten(spec), k); }

/// Single cell laid out over [-d/2, d/2].
inline Profile cell_profile(const UnitCell& cell) { return flatten(build_periodic(cell, 1)); }

inline TransferMatrix cell_state_matrix(const UnitCell& cell, cplx k) {
  return profile_state_matrix(cell_profile(cell), k);
}

inline ScatteringCoefficients scattering_from(const TransferMatrix& m) {
  if (m.basis != Basis::traveling) throw Error(Errc::invalid_argument, "scattering needs a traveling-wave matrix");
  if (std::abs(m.m22) < 1e-300) throw Error(Errc::resonance_pole, "m22 = 0 at k = " + std::to_string(m.lead_k.real()));
  ScatteringCoefficients sc;
  sc.t = 1.0 / m.m22;
  sc.r = -m.m21 / m.m22;
  sc.T = std::norm(sc.t);
  sc.R = std::norm(sc.r);
  return sc;
}

struct CellScattering {
  TransferMatrix matrix;
  ScatteringCoefficients coefficients;
};

inline CellScattering cell_matrix(const UnitCell& cell, cplx k) {
  const TransferMatrix m = to_traveling(cell_state_matrix(cell, k), k);
  return {m, scattering_from(m)};
}

inline BlochPhase bloch_phase(const TransferMatrix& m) {
  const cplx half_trace = 0.5 * m.trace();
  const cplx phi = std::acos(half_trace);
  return {phi, std::abs(phi.imag()) < passband_tolerance};
}

/// M^N through U_{N-1} and U_{N-2} evaluated at cos(phi) = Tr M / 2.
inline TransferMatrix chebyshev_power(const TransferMatrix& m, int n) {
  if (n < 0) throw Error(Errc::invalid_argument, "negative power");
  const cplx x = 0.5 * m.trace();
  const cplx u1 = chebyshev_u(n - 1, x);
  const cplx u2 = chebyshev_u(n - 2, x);
  return {m.m11 * u1 - u2, m.m12 * u1, m.m21 * u1, m.m22 * u1 - u2, m.basis, m.lead_k};
}

/// M^N by repeated multiplication.
inline TransferMatrix fold_power(const TransferMatrix& m, int n) {
  TransferMatrix out = TransferMatrix::identity(m.basis, m.lead_k);
  for (int i = 0; i < n; ++i) out = m * out;
  return out;
}

/// T_N = 1 / (1 + (1/|t|^2 - 1) sin^2(N phi) / sin^2(phi)) for N copies of the cell.
inline double transmission_N(const UnitCell& cell, int n_cells, double k) {
  const auto cs = cell_matrix(cell, k);
  const BlochPhase bp = bloch_phase(cs.matrix);
  // 1/|t|^2 - 1 = |r/t|^2 = |m21|^2, free of cancellation.
  const double contrast = std::norm(cs.matrix.m21);
  cplx ratio;
  const cplx s = std::sin(bp.phi);
  if (std::abs(s) > 1e-6) {
    ratio = std::sin(static_cast<double>(n_cells) * bp.phi) / s;
  } else {
    ratio = chebyshev_u(n_cells - 1, std::cos(bp.phi));
  }
  return 1.0 / (1.0 + contrast * std::norm(ratio));
}

/// Transmission and reflection of an arbitrary structure at real k.
inline ScatteringCoefficients structure_scattering(const Profile& prof, double k) {
  return scattering_from(profile_matrix(prof, k));
}

inline double structure_transmission(const Profile& prof, double k) { return structure_scattering(prof, k).T; }

/// |r|^2 computed directly, accurate when T is close to 1.
inline double structure_reflectance(const Profile& prof, double k) {
  const TransferMatrix m = profile_matrix(prof, k);
  return std::norm(m.m21 / m.m22);
}

}  // namespace ptrguard
