#pragma once

// Piecewise-constant potentials with Dirac scatterers.
//
// Units: the cell period d sets the length scale. Lengths are in d, heights
// (and k^2) in 1/d^2, delta strengths in 1/d. The scattering region of an
// N-cell structure is [-D/2, D/2] with D = N d.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptrguard/error.hpp"

namespace ptrguard {

inline constexpr double mirror_tolerance = 1e-12;

struct Segment {
  double length = 0.0;
  double height = 0.0;
};

struct DiracScatterer {
  double position = 0.0;
  double strength = 0.0;
};

/// One period of the potential: segments laid out left to right over
/// [-d/2, d/2] plus point scatterers at cell-local positions.
class UnitCell {
 public:
  UnitCell(std::vector<Segment> segments, std::vector<DiracScatterer> deltas = {})
      : segments_(std::move(segments)), deltas_(std::move(deltas)) {
    if (segments_.empty()) throw Error(Errc::invalid_argument, "unit cell has no segments");
    period_ = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!(s.length > 0.0) || !std::isfinite(s.length)) {
        throw Error(Errc::invalid_argument, "segment " + std::to_string(i) + " length must be positive");
      }
      if (!std::isfinite(s.height)) {
        throw Error(Errc::invalid_argument, "segment " + std::to_string(i) + " height must be finite");
      }
      period_ += s.length;
    }
    const double half = 0.5 * period_;
    for (std::size_t i = 0; i < deltas_.size(); ++i) {
      const auto& c = deltas_[i];
      if (!std::isfinite(c.strength) || !std::isfinite(c.position) ||
          std::abs(c.position) > half + mirror_tolerance) {
        throw Error(Errc::out_of_region, "cell delta " + std::to_string(i) + " outside [-d/2, d/2]");
      }
    }
  }

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::vector<DiracScatterer>& deltas() const noexcept { return deltas_; }
  double period() const noexcept { return period_; }

  /// Segments with nonzero height; these are the targets of per-barrier offsets.
  std::size_t barrier_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(segments_.begin(), segments_.end(), [](const Segment& s) { return s.height != 0.0; }));
  }

  bool is_mirror_symmetric() const {
    const std::size_t n = segments_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = segments_[i];
      const auto& b = segments_[n - 1 - i];
      if (std::abs(a.length - b.length) > mirror_tolerance || std::abs(a.height - b.height) > mirror_tolerance) {
        return false;
      }
    }
    // Every delta needs a partner of equal strength at the mirrored position.
    std::vector<bool> used(deltas_.size(), false);
    for (std::size_t i = 0; i < deltas_.size(); ++i) {
      bool found = false;
      for (std::size_t j = 0; j < deltas_.size() && !found; ++j) {
        if (used[j]) continue;
        if (std::abs(deltas_[i].position + deltas_[j].position) <= mirror_tolerance &&
            std::abs(deltas_[i].strength - deltas_[j].strength) <= mirror_tolerance) {
          used[j] = true;
          found = true;
        }
      }
      if (!found) return false;
    }
    return true;
  }

 private:
  std::vector<Segment> segments_;
  std::vector<DiracScatterer> deltas_;
  double period_ = 0.0;
};

/// The perturbation V1: point scatterers in global coordinates plus optional
/// per-barrier height offsets (empty means none).
struct Perturbation {
  std::vector<DiracScatterer> deltas;
  std::vector<double> height_offsets;

  bool empty() const noexcept {
    return deltas.empty() &&
           std::all_of(height_offsets.begin(), height_offsets.end(), [](double u) { return u == 0.0; });
  }
};

/// N copies of a unit cell plus an epsilon-scaled perturbation.
/// The scale is stored rather than baked in so sweeps can rescale cheaply.
class StructureSpec {
 public:
  const UnitCell& cell() const noexcept { return cell_; }
  int n_cells() const noexcept { return n_cells_; }
  double period() const noexcept { return cell_.period(); }
  double total_length() const noexcept { return static_cast<double>(n_cells_) * cell_.period(); }
  double half_length() const noexcept { return 0.5 * total_length(); }
  const Perturbation& perturbation() const noexcept { return perturbation_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t barrier_count() const noexcept { return cell_.barrier_count() * static_cast<std::size_t>(n_cells_); }

  /// Same structure, different perturbation scale.
  StructureSpec with_epsilon(double epsilon) const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw Error(Errc::invalid_argument, "epsilon must be finite and non-negative");
    }
    StructureSpec s = *this;
    s.epsilon_ = epsilon;
    return s;
  }

  /// The unperturbed potential V0.
  StructureSpec unperturbed() const {
    StructureSpec s = *this;
    s.perturbation_ = {};
    s.epsilon_ = 0.0;
    return s;
  }

 private:
  StructureSpec(UnitCell cell, int n_cells) : cell_(std::move(cell)), n_cells_(n_cells) {}

  friend StructureSpec build_periodic(const UnitCell& cell, int n_cells);
  friend StructureSpec overlay_perturbation(const StructureSpec& base, std::vector<DiracScatterer> deltas,
                                            std::optional<std::vector<double>> height_offsets, double epsilon);

  UnitCell cell_;
  int n_cells_ = 1;
  Perturbation perturbation_;
  double epsilon_ = 0.0;
};

inline StructureSpec build_periodic(const UnitCell& cell, int n_cells) {
  if (n_cells < 1) throw Error(Errc::invalid_argument, "n_cells must be at least 1");
  return StructureSpec(cell, n_cells);
}

inline StructureSpec overlay_perturbation(const StructureSpec& base, std::vector<DiracScatterer> deltas,
                                          std::optional<std::vector<double>> height_offsets, double epsilon) {
  const double half = base.half_length();
  const double tol = mirror_tolerance * std::max(1.0, base.total_length());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto& c = deltas[i];
    if (!std::isfinite(c.position) || std::abs(c.position) > half + tol) {
      throw Error(Errc::out_of_region,
                  "perturbation delta " + std::to_string(i) + " at x=" + std::to_string(c.position));
    }
    if (!std::isfinite(c.strength)) {
      throw Error(Errc::invalid_argument, "perturbation delta " + std::to_string(i) + " strength");
    }
  }
  if (height_offsets && height_offsets->size() != base.barrier_count()) {
    throw Error(Errc::invalid_argument, "height_offsets has " + std::to_string(height_offsets->size()) +
                                            " entries, structure has " + std::to_string(base.barrier_count()) +
                                            " barriers");
  }
  StructureSpec s = base.with_epsilon(epsilon);
  s.perturbation_.deltas = std::move(deltas);
  s.perturbation_.height_offsets = height_offsets ? std::move(*height_offsets) : std::vector<double>{};
  return s;
}

/// Cell centers a_p = -D/2 + (p - 1/2) d, p = 1..N.
inline std::vector<double> cell_centers(const StructureSpec& spec) {
  std::vector<double> a;
  const double d = spec.period();
  const double half = spec.half_length();
  for (int p = 1; p <= spec.n_cells(); ++p) a.push_back(-half + (p - 0.5) * d);
  return a;
}

/// Cell edges b_p = -D/2 + p d, p = 0..N.
inline std::vector<double> cell_edges(const StructureSpec& spec) {
  std::vector<double> b;
  const double d = spec.period();
  const double half = spec.half_length();
  for (int p = 0; p <= spec.n_cells(); ++p) b.push_back(-half + p * d);
  return b;
}

/// Global left edge of every barrier, in barrier order.
inline std::vector<double> barrier_left_edges(const StructureSpec& spec) {
  std::vector<double> edges;
  const double d = spec.period();
  for (int p = 0; p < spec.n_cells(); ++p) {
    double x = -spec.half_length() + p * d;
    for (const auto& seg : spec.cell().segments()) {
      if (seg.height != 0.0) edges.push_back(x);
      x += seg.length;
    }
  }
  return edges;
}

// ---------------------------------------------------------------------------
// Flattened profile

/// A constant-height stretch [x0, x0 + length] followed by a point scatterer
/// of strength delta_after at its right end (zero when absent).
struct Piece {
  double x0 = 0.0;
  double length = 0.0;
  double height = 0.0;
  double delta_after = 0.0;
  int barrier = -1;  ///< global barrier index, -1 for non-barrier segments
  int cell = 0;      ///< 0-based cell index

  double x1() const noexcept { return x0 + length; }
};

/// The evaluated potential V0 + eps V1 over [left, right].
struct Profile {
  double left = 0.0;
  double right = 0.0;
  double delta_at_left = 0.0;
  std::vector<Piece> pieces;

  /// Index of the piece containing x (right-closed for the last one).
  std::size_t locate(double x) const {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), x, [](double v, const Piece& p) { return v < p.x0; });
    if (it == pieces.begin()) return 0;
    return static_cast<std::size_t>(std::distance(pieces.begin(), it)) - 1;
  }

  /// Strength of the scatterer at junction j: j = 0 is the left end,
  /// j = i + 1 is the right end of piece i.
  double junction_delta(std::size_t j) const { return j == 0 ? delta_at_left : pieces[j - 1].delta_after; }
};

namespace detail {

inline void place_delta(Profile& prof, double x, double c, double tol) {
  if (c == 0.0) return;
  if (std::abs(x - prof.left) <= tol) {
    prof.delta_at_left += c;
    return;
  }
  std::size_t i = prof.locate(x);
  // Snap to a junction when within tolerance of either end of the piece.
  if (i > 0 && std::abs(x - prof.pieces[i].x0) <= tol) {
    prof.pieces[i - 1].delta_after += c;
    return;
  }
  Piece& p = prof.pieces[i];
  if (std::abs(x - p.x1()) <= tol || (i + 1 == prof.pieces.size() && x >= p.x1())) {
    p.delta_after += c;
    return;
  }
  Piece right = p;
  const double left_len = x - p.x0;
  right.x0 = x;
  right.length = p.length - left_len;
  p.length = left_len;
  right.delta_after = p.delta_after;
  p.delta_after = c;
  prof.pieces.insert(prof.pieces.begin() + static_cast<std::ptrdiff_t>(i) + 1, right);
}

}  // namespace detail

/// Lay out the full structure left to right. Deltas on a junction are
/// attributed to the junction itself; deltas inside a segment split it.
inline Profile flatten(const StructureSpec& spec) {
  Profile prof;
  const double d = spec.period();
  const double half = spec.half_length();
  const double eps = spec.epsilon();
  const auto& offsets = spec.perturbation().height_offsets;
  const double tol = mirror_tolerance * std::max(1.0, spec.total_length());
  prof.left = -half;
  prof.right = half;

  int barrier = 0;
  for (int p = 0; p < spec.n_cells(); ++p) {
    const double origin = -half + p * d;
    double offset_in_cell = 0.0;
    for (const auto& seg : spec.cell().segments()) {
      Piece piece;
      piece.x0 = origin + offset_in_cell;
      piece.length = seg.length;
      piece.height = seg.height;
      piece.cell = p;
      if (seg.height != 0.0) {
        piece.barrier = barrier;
        if (!offsets.empty() && eps != 0.0) piece.height += eps * offsets[static_cast<std::size_t>(barrier)];
        ++barrier;
      }
      prof.pieces.push_back(piece);
      offset_in_cell += seg.length;
    }
  }

  for (int p = 0; p < spec.n_cells(); ++p) {
    const double center = -half + (p + 0.5) * d;
    for (const auto& c : spec.cell().deltas()) detail::place_delta(prof, center + c.position, c.strength, tol);
  }
  if (eps != 0.0) {
    for (const auto& c : spec.perturbation().deltas) detail::place_delta(prof, c.position, eps * c.strength, tol);
  }
  return prof;
}

/// Piecewise-constant part of the potential at x (zero outside the region).
inline double potential_at(const Profile& prof, double x) {
  if (x < prof.left || x > prof.right || prof.pieces.empty()) return 0.0;
  return prof.pieces[prof.locate(x)].height;
}

/// Adjacent equal-height pieces with no scatterer between them merged.
inline Profile merged(const Profile& prof) {
  Profile out;
  out.left = prof.left;
  out.right = prof.right;
  out.delta_at_left = prof.delta_at_left;
  for (const auto& p : prof.pieces) {
    if (!out.pieces.empty() && out.pieces.back().delta_after == 0.0 && out.pieces.back().height == p.height) {
      Piece& last = out.pieces.back();
      last.length = p.x1() - last.x0;
      last.delta_after = p.delta_after;
      last.barrier = -1;
      continue;
    }
    out.pieces.push_back(p);
  }
  return out;
}

/// Mirror symmetry V(x) = V(-x) of the evaluated profile, deltas included.
inline bool is_mirror_symmetric(const Profile& prof) {
  const std::size_t n = prof.pieces.size();
  const double tol = mirror_tolerance * std::max(1.0, prof.right - prof.left);
  if (std::abs(prof.left + prof.right) > tol) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = prof.pieces[i];
    const auto& b = prof.pieces[n - 1 - i];
    if (std::abs(a.length - b.length) > tol || std::abs(a.height - b.height) > mirror_tolerance) return false;
  }
  for (std::size_t j = 0; j <= n; ++j) {
    if (std::abs(prof.junction_delta(j) - prof.junction_delta(n - j)) > mirror_tolerance) return false;
  }
  return true;
}

inline bool is_mirror_symmetric(const StructureSpec& spec) { return is_mirror_symmetric(flatten(spec)); }

/// Cut cell p (1-based) back out of the unperturbed layout. Scatterers on the
/// two cell edges are shared with the neighbours, so those come from the cell
/// definition; everything else is read back from the profile.
inline UnitCell slice_cell(const StructureSpec& spec, int p) {
  if (p < 1 || p > spec.n_cells()) throw Error(Errc::invalid_argument, "cell index out of range");
  const Profile prof = flatten(spec.unperturbed());
  const double center = -spec.half_length() + (p - 0.5) * spec.period();
  const double half_d = 0.5 * spec.period();
  std::vector<double> boundaries;
  double acc = 0.0;
  for (const auto& seg : spec.cell().segments()) {
    boundaries.push_back(acc);
    acc += seg.length;
  }
  auto on_boundary = [&](double offset) {
    return std::any_of(boundaries.begin(), boundaries.end(),
                       [&](double b) { return std::abs(b - offset) <= mirror_tolerance * spec.total_length(); });
  };
  std::vector<Segment> segs;
  std::vector<DiracScatterer> deltas;
  for (std::size_t i = 0; i < prof.pieces.size(); ++i) {
    const auto& piece = prof.pieces[i];
    if (piece.cell != p - 1) continue;
    const bool last_in_cell = (i + 1 == prof.pieces.size()) || prof.pieces[i + 1].cell != p - 1;
    if (!segs.empty() && !on_boundary(piece.x0 - (center - half_d))) {
      // Rejoin a segment that a scatterer split in two.
      segs.back().length += piece.length;
    } else {
      segs.push_back({piece.length, piece.height});
    }
    if (!last_in_cell && piece.delta_after != 0.0) deltas.push_back({piece.x1() - center, piece.delta_after});
  }
  for (const auto& c : spec.cell().deltas()) {
    if (std::abs(std::abs(c.position) - half_d) <= mirror_tolerance) deltas.push_back(c);
  }
  return UnitCell(std::move(segs), std::move(deltas));
}

}  // namespace ptrguard
