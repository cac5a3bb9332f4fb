#pragma once

// Pass-band detection and perfect transmission resonances of N-cell structures.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ptrguard/error.hpp"
#include "ptrguard/potential.hpp"
#include "ptrguard/roots.hpp"
#include "ptrguard/transfer.hpp"

namespace ptrguard {

struct Band {
  int index = 0;  ///< 1-based, counted from the low end of the scanned range
  double k_lo = 0.0;
  double k_hi = 0.0;

  double width() const noexcept { return k_hi - k_lo; }
  bool contains(double k) const noexcept { return k >= k_lo && k <= k_hi; }
};

enum class PtrKind { bloch, accidental };

struct PtrRecord {
  int band_index = 0;
  int n = 0;           ///< 1..N-1 for Bloch-phase resonances, 0 for accidental ones
  double phi_n = 0.0;  ///< n pi / N
  double k = 0.0;
  PtrKind kind = PtrKind::bloch;
};

inline constexpr int band_scan_density = 2048;  // grid points per unit of k d
inline constexpr double band_edge_tolerance = 1e-12;
inline constexpr double ptr_tolerance = 1e-8;

/// cos(phi) = Tr M / 2 of the cell; real for real potentials at real k.
inline double half_trace(const Profile& cell_prof, double k) {
  const TransferMatrix p = profile_state_matrix(cell_prof, k);
  return 0.5 * (p.m11 + p.m22).real();
}

namespace detail {

inline bool in_band_value(double x) { return std::abs(x) <= 1.0 + 1e-12; }

inline std::vector<double> k_grid(double kmin, double kmax, double period) {
  const int points = std::max(16, static_cast<int>(std::ceil((kmax - kmin) * period * band_scan_density)) + 1);
  std::vector<double> ks(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) ks[static_cast<std::size_t>(i)] = kmin + (kmax - kmin) * i / (points - 1);
  return ks;
}

inline double refine_edge(const Profile& cell_prof, double a, double b) {
  // a and b straddle |Tr/2| = 1.
  const bool a_in = in_band_value(half_trace(cell_prof, a));
  while (b - a > band_edge_tolerance) {
    const double m = 0.5 * (a + b);
    if (in_band_value(half_trace(cell_prof, m)) == a_in) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Pass bands (|Tr M/2| <= 1) of the cell within [kmin, kmax], edges refined to 1e-12.
inline std::vector<Band> find_bands(const UnitCell& cell, double kmin, double kmax) {
  if (!(kmin > 0.0) || !(kmax > kmin)) throw Error(Errc::invalid_argument, "need 0 < kmin < kmax");
  const Profile prof = cell_profile(cell);
  const auto ks = detail::k_grid(kmin, kmax, cell.period());
  std::vector<Band> bands;
  bool inside = detail::in_band_value(half_trace(prof, ks.front()));
  double start = ks.front();
  for (std::size_t i = 1; i < ks.size(); ++i) {
    const bool now = detail::in_band_value(half_trace(prof, ks[i]));
    if (now == inside) continue;
    const double edge = detail::refine_edge(prof, ks[i - 1], ks[i]);
    if (now) {
      start = edge;
    } else {
      bands.push_back({static_cast<int>(bands.size()) + 1, start, edge});
    }
    inside = now;
  }
  if (inside) bands.push_back({static_cast<int>(bands.size()) + 1, start, ks.back()});
  return bands;
}

/// Bloch-phase resonances phi = n pi / N (n = 1..N-1) inside one pass band,
/// plus accidental resonances where the single cell is itself reflectionless.
inline std::vector<PtrRecord> find_ptrs(const UnitCell& cell, int n_cells, const Band& band) {
  if (n_cells < 1) throw Error(Errc::invalid_argument, "n_cells must be at least 1");
  if (!(band.k_hi > band.k_lo) || !(band.k_lo >= 0.0)) throw Error(Errc::invalid_argument, "empty band interval");
  const Profile prof = cell_profile(cell);
  const auto ks = detail::k_grid(band.k_lo, band.k_hi, cell.period());
  // Endpoints are band edges to within the bisection tolerance; probe the interior.
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double k = ks[i];
    if (!detail::in_band_value(half_trace(prof, k))) {
      throw Error(Errc::band_straddles_gap, "gap at k = " + std::to_string(k));
    }
  }

  std::vector<PtrRecord> out;
  const double lo_val = half_trace(prof, band.k_lo);
  const double hi_val = half_trace(prof, band.k_hi);
  for (int n = 1; n < n_cells; ++n) {
    const double phi = pi * n / n_cells;
    const double target = std::cos(phi);
    auto f = [&](double k) { return half_trace(prof, k) - target; };
    if ((lo_val - target) * (hi_val - target) > 0.0) continue;
    // Full precision: fields at narrow-band resonances move by ~1e3 per unit k.
    const double k = find_root(f, band.k_lo, band.k_hi, 0.0);
    const double tn = transmission_N(cell, n_cells, k);
    if (std::abs(1.0 - tn) > ptr_tolerance) {
      throw Error(Errc::not_converged, "T_N = " + std::to_string(tn) + " at PTR n = " + std::to_string(n));
    }
    out.push_back({band.index, n, phi, k, PtrKind::bloch});
  }
  if (n_cells > 1 && out.empty()) {
    throw Error(Errc::root_not_bracketed, "no Bloch-phase resonance bracketed in the band (band too narrow?)");
  }

  // Accidental resonances: local minima of the cell reflectance that reach zero.
  auto refl = [&](double k) { return std::norm(profile_matrix(prof, k).m21); };
  constexpr int probes = 512;
  std::vector<double> r(probes + 1);
  double r_max = 0.0;
  for (int i = 0; i <= probes; ++i) {
    r[static_cast<std::size_t>(i)] = refl(band.k_lo + band.width() * i / probes);
    r_max = std::max(r_max, r[static_cast<std::size_t>(i)]);
  }
  if (r_max > 1e-24) {
    for (int i = 1; i < probes; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (!(r[u] <= r[u - 1] && r[u] <= r[u + 1])) continue;
      const double a = band.k_lo + band.width() * (i - 1) / probes;
      const double b = band.k_lo + band.width() * (i + 1) / probes;
      const auto [k, val] = minimize(refl, a, b);
      if (val < 1e-12 * r_max) out.push_back({band.index, 0, 0.0, k, PtrKind::accidental});
    }
  }
  std::sort(out.begin(), out.end(), [](const PtrRecord& a, const PtrRecord& b) { return a.k < b.k; });
  return out;
}

/// The Bloch-phase resonances of the first pass band found in [kmin, kmax].
inline std::vector<PtrRecord> first_band_ptrs(const UnitCell& cell, int n_cells, double kmin, double kmax) {
  const auto bands = find_bands(cell, kmin, kmax);
  if (bands.empty()) throw Error(Errc::root_not_bracketed, "no pass band in the requested range");
  auto all = find_ptrs(cell, n_cells, bands.front());
  std::erase_if(all, [](const PtrRecord& p) { return p.kind != PtrKind::bloch; });
  std::sort(all.begin(), all.end(), [](const PtrRecord& a, const PtrRecord& b) { return a.n < b.n; });
  return all;
}

}  // namespace ptrguard
