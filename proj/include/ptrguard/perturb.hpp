#pragma once

// First-order resonance shifts and the inverse design of point-scatterer
// perturbations that keep chosen perfect transmission resonances.
//
// For a resonance k0 with field psi0 and a perturbation V1 the first-order
// coefficient of k = k0 + eps k1 is
//
//   k1 = int V1 psi0^2 / ( i [psi0^2(D/2) - psi0^2(-D/2)] + 2 k0 int psi0^2 ).
//
// With the symmetrizing incident phase the denominator is real, so Im k1
// vanishes exactly when sum_m c_m Re psi0(x_m) Im psi0(x_m) does.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ptrguard/error.hpp"
#include "ptrguard/field.hpp"
#include "ptrguard/numeric.hpp"
#include "ptrguard/potential.hpp"
#include "ptrguard/ptrs.hpp"
#include "ptrguard/roots.hpp"
#include "ptrguard/transfer.hpp"

namespace ptrguard {

inline constexpr double protect_tolerance = 1e-10;     // relative to k0
inline constexpr double design_condition_limit = 1e12;
inline constexpr double degenerate_weight = 1e-10;     // relative to the largest weight

struct ShiftResult {
  int n = 0;
  double k0 = 0.0;
  cplx k1;
  bool is_protected = false;
};

/// Field of the unperturbed structure at a resonance, with the symmetrizing phase.
inline WaveField resonance_field(const StructureSpec& spec, const PtrRecord& ptr) {
  const StructureSpec base = spec.unperturbed();
  return WaveField(flatten(base), ptr.k, Side::left, symmetrizing_amplitude(ptr.k, base.total_length(), ptr.n));
}

/// k1 from an already computed unperturbed field.
inline ShiftResult first_order_shift(const WaveField& field, int n, const Perturbation& v1) {
  std::vector<double> positions;
  for (const auto& c : v1.deltas) positions.push_back(c.position);
  const OverlapIntegrals ov = overlap_integrals(field, positions);
  if (!v1.height_offsets.empty() && v1.height_offsets.size() != ov.barrier_integrals.size()) {
    throw Error(Errc::invalid_argument, "height_offsets size does not match the barrier count");
  }
  cplx numerator{0.0};
  for (std::size_t m = 0; m < v1.deltas.size(); ++m) numerator += v1.deltas[m].strength * ov.point_values[m];
  for (std::size_t b = 0; b < v1.height_offsets.size(); ++b) numerator += v1.height_offsets[b] * ov.barrier_integrals[b];
  const cplx denominator = ov.boundary_term + 2.0 * field.k() * ov.psi2_integral;
  if (std::abs(denominator) < 1e-12) {
    throw Error(Errc::degenerate_denominator, "|denominator| = " + std::to_string(std::abs(denominator)));
  }
  ShiftResult out;
  out.n = n;
  out.k0 = field.k();
  out.k1 = numerator / denominator;
  out.is_protected = std::abs(out.k1.imag()) < protect_tolerance * out.k0;
  return out;
}

inline ShiftResult first_order_shift(const StructureSpec& spec0, const PtrRecord& ptr, const Perturbation& v1) {
  return first_order_shift(resonance_field(spec0, ptr), ptr.n, v1);
}

/// Shifts of every listed resonance under the same perturbation.
inline std::vector<ShiftResult> shift_table(const StructureSpec& spec0, const std::vector<PtrRecord>& ptrs,
                                            const Perturbation& v1) {
  std::vector<ShiftResult> out;
  for (const auto& p : ptrs) out.push_back(first_order_shift(spec0, p, v1));
  return out;
}

// ---------------------------------------------------------------------------
// Placements

enum class Placement { centers, edges, absolute };

/// Scatterer positions given by kind and indices (1-based centers a_p,
/// 0-based edges b_p) or by absolute coordinates.
struct PositionSet {
  Placement kind = Placement::absolute;
  std::vector<int> indices;
  std::vector<double> coordinates;
};

inline std::vector<double> resolve_positions(const StructureSpec& spec, const PositionSet& set) {
  switch (set.kind) {
    case Placement::centers: {
      const auto a = cell_centers(spec);
      std::vector<double> out;
      for (int p : set.indices) {
        if (p < 1 || p > spec.n_cells()) throw Error(Errc::invalid_argument, "center index " + std::to_string(p));
        out.push_back(a[static_cast<std::size_t>(p - 1)]);
      }
      return out;
    }
    case Placement::edges: {
      const auto b = cell_edges(spec);
      std::vector<double> out;
      for (int p : set.indices) {
        if (p < 0 || p > spec.n_cells()) throw Error(Errc::invalid_argument, "edge index " + std::to_string(p));
        out.push_back(b[static_cast<std::size_t>(p)]);
      }
      return out;
    }
    case Placement::absolute:
      for (double x : set.coordinates) {
        if (std::abs(x) > spec.half_length() * (1.0 + mirror_tolerance)) {
          throw Error(Errc::out_of_region, "x = " + std::to_string(x));
        }
      }
      return set.coordinates;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Design

struct DesignProblem {
  std::vector<double> positions;
  std::map<int, double> fixed;  ///< 0-based position index -> strength
  std::vector<int> targets;     ///< resonance numbers n to keep
};

struct DesignResult {
  std::vector<double> strengths;
  std::vector<double> residuals;  ///< |sum_m c_m Re psi Im psi (x_m)| per target
  std::vector<double> residual_scales;  ///< max_m |c_m Re psi Im psi (x_m)| per target
  double condition_number = 1.0;
};

/// Re psi Im psi at x for the symmetrized resonance field.
inline double field_weight(const WaveField& field, double x) {
  const cplx v = field.psi(x);
  return v.real() * v.imag();
}

/// Solve sum_m c_m w(n, m) = 0 for the free strengths. weights[t][m] holds
/// the weight of position m for target t.
inline DesignResult solve_design(const std::vector<std::vector<double>>& weights, std::size_t n_positions,
                                 const std::map<int, double>& fixed) {
  const std::size_t q = weights.size();
  if (fixed.empty()) {
    throw Error(Errc::singular_design, "no fixed strength; the homogeneous system only has the zero solution");
  }
  for (const auto& [idx, c] : fixed) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n_positions) {
      throw Error(Errc::invalid_argument, "fixed index c" + std::to_string(idx + 1) + " has no position");
    }
    (void)c;
  }
  if (q + fixed.size() != n_positions) {
    throw Error(Errc::invalid_argument, std::to_string(q) + " targets + " + std::to_string(fixed.size()) +
                                            " fixed strengths must equal " + std::to_string(n_positions) +
                                            " positions");
  }
  for (const auto& row : weights) {
    if (row.size() != n_positions) throw Error(Errc::invalid_argument, "weight row size mismatch");
  }

  double w_max = 0.0;
  for (const auto& row : weights) {
    for (double w : row) w_max = std::max(w_max, std::abs(w));
  }
  for (std::size_t m = 0; m < n_positions && q > 0; ++m) {
    bool all_small = true;
    for (const auto& row : weights) all_small = all_small && std::abs(row[m]) < degenerate_weight * w_max;
    if (all_small) {
      throw Error(Errc::degenerate_position,
                  "position " + std::to_string(m + 1) + " has Re psi Im psi = 0 for every target; move it");
    }
  }

  std::vector<std::size_t> free_idx;
  for (std::size_t m = 0; m < n_positions; ++m) {
    if (!fixed.contains(static_cast<int>(m))) free_idx.push_back(m);
  }

  DesignResult out;
  out.strengths.assign(n_positions, 0.0);
  for (const auto& [idx, c] : fixed) out.strengths[static_cast<std::size_t>(idx)] = c;

  if (q > 0) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    Eigen::VectorXd b(static_cast<Eigen::Index>(q));
    for (std::size_t t = 0; t < q; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      for (std::size_t j = 0; j < q; ++j) a(ti, static_cast<Eigen::Index>(j)) = weights[t][free_idx[j]];
      double rhs = 0.0;
      for (const auto& [idx, c] : fixed) rhs -= c * weights[t][static_cast<std::size_t>(idx)];
      b(ti) = rhs;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double s_min = sv(sv.size() - 1);
    out.condition_number = (s_min > 0.0) ? sv(0) / s_min : std::numeric_limits<double>::infinity();
    if (!(out.condition_number <= design_condition_limit)) {
      throw Error(Errc::ill_conditioned, "condition number " + std::to_string(out.condition_number));
    }
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    for (std::size_t j = 0; j < q; ++j) out.strengths[free_idx[j]] = x(static_cast<Eigen::Index>(j));
  }

  for (const auto& row : weights) {
    double sum = 0.0;
    double scale = 0.0;
    for (std::size_t m = 0; m < n_positions; ++m) {
      sum += out.strengths[m] * row[m];
      scale = std::max(scale, std::abs(out.strengths[m] * row[m]));
    }
    out.residuals.push_back(std::abs(sum));
    out.residual_scales.push_back(scale);
  }
  return out;
}

inline const PtrRecord& ptr_by_number(const std::vector<PtrRecord>& ptrs, int n) {
  for (const auto& p : ptrs) {
    if (p.n == n && p.kind == PtrKind::bloch) return p;
  }
  throw Error(Errc::invalid_argument, "no resonance with n = " + std::to_string(n));
}

inline DesignResult design_strengths(const StructureSpec& spec0, const std::vector<PtrRecord>& ptrs,
                                     const DesignProblem& problem) {
  std::vector<std::vector<double>> weights;
  for (int n : problem.targets) {
    const WaveField field = resonance_field(spec0, ptr_by_number(ptrs, n));
    std::vector<double> row;
    for (double x : problem.positions) row.push_back(field_weight(field, x));
    weights.push_back(std::move(row));
  }
  return solve_design(weights, problem.positions.size(), problem.fixed);
}

inline Perturbation as_perturbation(const std::vector<double>& positions, const std::vector<double>& strengths) {
  Perturbation v1;
  for (std::size_t m = 0; m < positions.size(); ++m) v1.deltas.push_back({positions[m], strengths[m]});
  return v1;
}

// ---------------------------------------------------------------------------
// Closed-form field products at cell centers and edges (mirror-symmetric cells)

/// Traveling-wave matrix from the cell's left edge to its center; a scatterer
/// sitting exactly on the center is split evenly between the two halves.
inline TransferMatrix half_cell_matrix(const UnitCell& cell, double k) {
  const Profile prof = cell_profile(cell);
  const double tol = mirror_tolerance * std::max(1.0, cell.period());
  TransferMatrix m = delta_matrix(prof.delta_at_left);
  for (const auto& p : prof.pieces) {
    if (p.x1() <= tol) {
      m = segment_matrix({p.length, p.height}, k) * m;
      const double c = (std::abs(p.x1()) <= tol) ? 0.5 * p.delta_after : p.delta_after;
      if (c != 0.0) m = delta_matrix(c) * m;
      if (std::abs(p.x1()) <= tol) break;
    } else {
      m = segment_matrix({-p.x0, p.height}, k) * m;
      break;
    }
  }
  return to_traveling(m, k);
}

/// Re psi Im psi at center a_p, psi normalized to psi(-D/2) = 1:
/// f(phi_n) g(p, phi_n) with f = w_R w_I / sin^2((N-1) phi_n) and
/// g = sin^2((N-p) phi_n) - sin^2((p-1) phi_n).
inline double center_product(const UnitCell& cell, int n_cells, const PtrRecord& ptr, int p) {
  if (p < 1 || p > n_cells) throw Error(Errc::invalid_argument, "center index " + std::to_string(p));
  const double phi = pi * ptr.n / n_cells;
  const double s = std::sin((n_cells - 1) * phi);
  if (std::abs(s) < 1e-14) throw Error(Errc::degenerate_denominator, "sin((N-1) phi_n) = 0");
  const TransferMatrix m1 = half_cell_matrix(cell, ptr.k);
  const cplx w = m1.m11 + m1.m21;
  const double f = w.real() * w.imag() / (s * s);
  const double g = sq(std::sin((n_cells - p) * phi)) - sq(std::sin((p - 1) * phi));
  return f * g;
}

/// Real eigenvector ratio lambda of the cell matrix: M (1, lambda) = e^{i phi} (1, lambda).
inline double cell_eigen_ratio(const UnitCell& cell, double k, double phi) {
  const TransferMatrix m = cell_matrix(cell, k).matrix;
  const cplx e = std::polar(1.0, phi);
  const cplx d1 = m.m12;
  const cplx d2 = e - m.m22;
  const cplx lambda = (std::abs(d1) >= std::abs(d2)) ? (e - m.m11) / d1 : m.m21 / d2;
  return lambda.real();
}

/// Re psi Im psi at edge b_p, psi normalized to psi(-D/2) = 1:
/// (1/2) (1 + lambda) / (1 - lambda) sin(2 p phi_n).
inline double edge_product(const UnitCell& cell, int n_cells, const PtrRecord& ptr, int p) {
  if (p < 0 || p > n_cells) throw Error(Errc::invalid_argument, "edge index " + std::to_string(p));
  const double phi = pi * ptr.n / n_cells;
  const double lambda = cell_eigen_ratio(cell, ptr.k, phi);
  return 0.5 * (1.0 + lambda) / (1.0 - lambda) * std::sin(2.0 * p * phi);
}

/// g(p, phi) at cell centers.
inline double center_weight(int n_cells, double phi, int p) {
  return sq(std::sin((n_cells - p) * phi)) - sq(std::sin((p - 1) * phi));
}

/// g~(p, phi) at cell edges.
inline double edge_weight(double phi, int p) { return std::sin(2.0 * p * phi); }

// ---------------------------------------------------------------------------
// Pairing

struct PairingReport {
  std::vector<ShiftResult> table;
  std::vector<int> required;  ///< resonance numbers that must come out protected
  std::vector<int> violations;
  bool satisfied = false;
};

inline constexpr double pairing_tolerance = 1e-10;

/// Fold a resonance number into 1..N-1 using phi -> -phi and phi -> phi + pi.
inline std::optional<int> fold_index(int m, int n_cells) {
  int r = ((m % n_cells) + n_cells) % n_cells;
  if (r == 0) return std::nullopt;
  return r;
}

/// Resonances a design protecting n must also protect for the given placement.
inline std::vector<int> dual_resonances(const PositionSet& set, int n_cells, int n) {
  std::vector<int> out{n};
  if (set.kind == Placement::absolute) return out;
  if (auto m = fold_index(n_cells - n, n_cells)) out.push_back(*m);
  if (set.kind == Placement::edges && n_cells % 2 == 0 && !set.indices.empty()) {
    const int parity = set.indices.front() % 2;
    const bool same = std::all_of(set.indices.begin(), set.indices.end(), [&](int p) { return p % 2 == parity; });
    if (same) {
      if (auto m = fold_index(n_cells / 2 + n, n_cells)) out.push_back(*m);
      if (auto m = fold_index(n_cells / 2 - n, n_cells)) out.push_back(*m);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline PairingReport pairing_check(const StructureSpec& spec0, const std::vector<PtrRecord>& ptrs,
                                   const PositionSet& set, const DesignResult& design, int n) {
  PairingReport rep;
  const auto positions = resolve_positions(spec0, set);
  const Perturbation v1 = as_perturbation(positions, design.strengths);
  rep.table = shift_table(spec0, ptrs, v1);
  rep.required = dual_resonances(set, spec0.n_cells(), n);
  for (int m : rep.required) {
    const auto it = std::find_if(rep.table.begin(), rep.table.end(), [&](const ShiftResult& s) { return s.n == m; });
    if (it == rep.table.end() || !(std::abs(it->k1.imag()) < pairing_tolerance)) rep.violations.push_back(m);
  }
  rep.satisfied = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Epsilon sweeps

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<double> peak_k;
  std::vector<double> peak_T;
  std::vector<double> one_minus_T;  ///< |r|^2 at the peak, computed directly
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> lost_after;  ///< last valid epsilon when the peak was lost
};

namespace detail {

inline cplx reflection_ratio(const Profile& prof, double k) {
  const TransferMatrix m = profile_matrix(prof, k);
  return m.m21 / m.m22;
}

}  // namespace detail

/// Minimum of |r|^2 inside [a, b]: Brent search, then polished as the root of
/// d|r|^2/dk = 2 Re(conj(r) r').
inline double refine_reflectance_minimum(const Profile& prof, double a, double b) {
  auto refl = [&](double k) { return std::norm(detail::reflection_ratio(prof, k)); };
  const double k_brent = minimize(refl, a, b).first;
  auto slope = [&](double k) {
    const double h = 1e-5 * k;
    const cplx r = detail::reflection_ratio(prof, k);
    const cplx dr = (detail::reflection_ratio(prof, k + h) - detail::reflection_ratio(prof, k - h)) / (2.0 * h);
    return (std::conj(r) * dr).real();
  };
  const double sa = slope(a);
  const double sb = slope(b);
  if (sa < 0.0 && sb > 0.0) {
    const double k = find_root(slope, a, b, 1e-14);
    return (refl(k) <= refl(k_brent)) ? k : k_brent;
  }
  return k_brent;
}

/// Transmission peak within [center - half_window, center + half_window];
/// nullopt when the best point sits on the window boundary.
inline std::optional<double> locate_peak(const Profile& prof, double center, double half_window,
                                         int probes = 96) {
  const double lo = std::max(center - half_window, 1e-9);
  const double hi = center + half_window;
  std::vector<double> ks(static_cast<std::size_t>(probes + 1));
  std::vector<double> r(ks.size());
  for (int i = 0; i <= probes; ++i) {
    const auto u = static_cast<std::size_t>(i);
    ks[u] = lo + (hi - lo) * i / probes;
    r[u] = std::norm(detail::reflection_ratio(prof, ks[u]));
  }
  // Interior local minima; follow the one nearest the previous peak.
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    if (r[i] <= r[i - 1] && r[i] <= r[i + 1]) {
      if (!best || std::abs(ks[i] - center) < std::abs(ks[*best] - center)) best = i;
    }
  }
  if (!best) return std::nullopt;
  return refine_reflectance_minimum(prof, ks[*best - 1], ks[*best + 1]);
}

/// Half the distance from resonance n to its nearest neighbour in the list.
inline double resonance_half_spacing(const std::vector<PtrRecord>& ptrs, int n) {
  const double k = ptr_by_number(ptrs, n).k;
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& p : ptrs) {
    if (p.n != n) gap = std::min(gap, std::abs(p.k - k));
  }
  if (!std::isfinite(gap)) gap = 0.1 * k;
  return 0.5 * gap;
}

/// Least-squares slope of log(1 - T) against log(eps) over points with
/// 1e-12 < 1 - T < 0.1.
inline double fit_loglog_slope(const std::vector<double>& eps, const std::vector<double>& one_minus_t) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double r = one_minus_t[i];
    if (!(r > 1e-12 && r < 0.1) || !(eps[i] > 0.0)) continue;
    const double x = std::log(eps[i]);
    const double y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

/// Follow the transmission peak born from `ptr` as the perturbation scale grows.
inline SweepResult epsilon_sweep(const StructureSpec& spec, const PtrRecord& ptr, const std::vector<double>& eps_grid,
                                 double half_window) {
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0) || (i > 0 && !(eps_grid[i] > eps_grid[i - 1]))) {
      throw Error(Errc::invalid_argument, "epsilon grid must be positive and increasing");
    }
  }
  SweepResult out;
  double center = ptr.k;
  for (double eps : eps_grid) {
    const Profile prof = flatten(spec.with_epsilon(eps));
    const auto peak = locate_peak(prof, center, half_window);
    if (!peak) {
      if (!out.epsilons.empty()) out.lost_after = out.epsilons.back();
      else out.lost_after = 0.0;
      break;
    }
    const auto sc = structure_scattering(prof, *peak);
    out.epsilons.push_back(eps);
    out.peak_k.push_back(*peak);
    out.peak_T.push_back(sc.T);
    out.one_minus_T.push_back(sc.R);
    center = *peak;
  }
  out.fitted_slope = fit_loglog_slope(out.epsilons, out.one_minus_T);
  return out;
}

}  // namespace ptrguard
