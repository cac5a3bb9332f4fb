#pragma once

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ptrguard/ptrguard.hpp"

namespace testing {

using namespace ptrguard;

// 5/12 free | 1/6 barrier of height 27 | 5/12 free, d = 1.
inline UnitCell barrier_cell() { return UnitCell({{5.0 / 12, 0.0}, {1.0 / 6, 27.0}, {5.0 / 12, 0.0}}); }

inline StructureSpec barriers8() { return build_periodic(barrier_cell(), 8); }

inline const std::vector<PtrRecord>& barrier_ptrs() {
  static const auto ptrs = first_band_ptrs(barrier_cell(), 8, 0.01, 3.5);
  return ptrs;
}

inline UnitCell free_cell(double d = 1.0) { return UnitCell({{d, 0.0}}); }

/// Mirror-symmetric three-segment cell with random widths and heights.
inline UnitCell random_symmetric_cell(std::mt19937& rng) {
  std::uniform_real_distribution<double> w(0.15, 0.4);
  std::uniform_real_distribution<double> h(-5.0, 40.0);
  const double outer = w(rng);
  const double inner = 1.0 - 2.0 * outer;
  const double ho = h(rng);
  return UnitCell({{outer, ho}, {inner, h(rng)}, {outer, ho}});
}

/// The two scatterers near the first two barriers (0.1 and 0.95 of the barrier width in).
inline std::vector<double> two_delta_positions() {
  const double s = 1.0 / 6;
  return {-4.0 + 5.0 / 12 + 0.1 * s, -3.0 + 5.0 / 12 + 0.95 * s};
}

inline std::vector<double> symmetric_offsets() { return {-27, 0, -72, 27, 27, -72, 0, -27}; }

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing
