#pragma once

// Stationary scattering fields psi(x), psi'(x) and their overlap integrals.
//
// Incident waves use the global phase convention: from the left the incoming
// wave is A exp(ikx), from the right it is A exp(-ikx).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ptrguard/error.hpp"
#include "ptrguard/numeric.hpp"
#include "ptrguard/potential.hpp"
#include "ptrguard/transfer.hpp"

namespace ptrguard {

enum class Side { left, right };

struct FieldSample {
  double x = 0.0;
  cplx psi;
  cplx dpsi;
};

using State = std::array<cplx, 2>;  // (psi, psi')

namespace detail {

inline State propagate(const State& s, cplx q2, double length) {
  const cplx c = cos_kernel(q2, length);
  const cplx sn = sinc_kernel(q2, length);
  return {c * s[0] + sn * s[1], -q2 * sn * s[0] + c * s[1]};
}

inline State kick(const State& s, double c) { return {s[0], s[1] + c * s[0]}; }

inline int samples_for(cplx q2, double length) {
  const double ql = std::abs(std::sqrt(q2)) * length;
  return std::max(64, 16 * static_cast<int>(std::ceil(ql)));
}

}  // namespace detail

/// Exact scattering solution over the profile at real k.
class WaveField {
 public:
  WaveField(Profile profile, double k, Side side, cplx amplitude)
      : profile_(std::move(profile)), k_(k), side_(side), amplitude_(amplitude) {
    if (!(k > 0.0)) throw Error(Errc::invalid_argument, "field needs k > 0");
    if (profile_.pieces.empty()) throw Error(Errc::invalid_argument, "empty profile");
    solve();
    sample();
  }

  double k() const noexcept { return k_; }
  Side side() const noexcept { return side_; }
  cplx amplitude() const noexcept { return amplitude_; }
  const Profile& profile() const noexcept { return profile_; }
  const std::vector<FieldSample>& samples() const noexcept { return samples_; }

  /// (psi, psi') just inside each piece's left end, after any scatterer there.
  const std::vector<State>& piece_states() const noexcept { return left_states_; }

  cplx psi_left_boundary() const { return left_lead_[0]; }
  cplx psi_right_boundary() const { return right_lead_[0]; }

  /// Reflected / transmitted waves as local values at the structure ends.
  cplx reflected_local() const { return reflected_; }
  cplx transmitted_local() const { return transmitted_; }

  /// psi' from the left of the scatterer at x when one sits there.
  State state_at(double x) const {
    check_inside(x);
    if (x == profile_.left) return left_lead_;
    const std::size_t i = profile_.locate(x);
    const Piece& p = profile_.pieces[i];
    return detail::propagate(left_states_[i], k_ * k_ - p.height, std::clamp(x - p.x0, 0.0, p.length));
  }

  cplx psi(double x) const { return state_at(x)[0]; }

 private:
  void check_inside(double x) const {
    const double tol = mirror_tolerance * std::max(1.0, profile_.right - profile_.left);
    if (x < profile_.left - tol || x > profile_.right + tol) {
      throw Error(Errc::out_of_region, "x = " + std::to_string(x));
    }
  }

  void solve() {
    const cplx ik = I * k_;
    const double half = 0.5 * (profile_.right - profile_.left);
    const std::size_t n = profile_.pieces.size();
    left_states_.assign(n, State{});
    const cplx phase = std::exp(-ik * half);
    if (side_ == Side::left) {
      // Unit outgoing wave on the right, propagated back to the left lead.
      State s{1.0, ik};
      right_lead_ = s;
      for (std::size_t i = n; i-- > 0;) {
        const Piece& p = profile_.pieces[i];
        s = detail::kick(s, -p.delta_after);
        s = detail::propagate(s, k_ * k_ - p.height, -p.length);
        left_states_[i] = s;
      }
      left_lead_ = detail::kick(s, -profile_.delta_at_left);
      const auto amp = wave_amplitudes(left_lead_, k_);
      rescale(amplitude_ * phase / amp[0]);
      reflected_ = wave_amplitudes(left_lead_, k_)[1];
      transmitted_ = right_lead_[0];
    } else {
      State s{1.0, -ik};
      left_lead_ = s;
      s = detail::kick(s, profile_.delta_at_left);
      for (std::size_t i = 0; i < n; ++i) {
        const Piece& p = profile_.pieces[i];
        left_states_[i] = s;
        s = detail::propagate(s, k_ * k_ - p.height, p.length);
        s = detail::kick(s, p.delta_after);
      }
      right_lead_ = s;
      const auto amp = wave_amplitudes(right_lead_, k_);
      rescale(amplitude_ * phase / amp[1]);
      reflected_ = wave_amplitudes(right_lead_, k_)[0];
      transmitted_ = left_lead_[0];
    }
  }

  void rescale(cplx factor) {
    for (auto& s : left_states_) s = {s[0] * factor, s[1] * factor};
    left_lead_ = {left_lead_[0] * factor, left_lead_[1] * factor};
    right_lead_ = {right_lead_[0] * factor, right_lead_[1] * factor};
  }

  // Every junction appears twice: once as the one-sided limit from the left,
  // once from the right, so psi' jumps are visible in the samples.
  void sample() {
    samples_.push_back({profile_.left, left_lead_[0], left_lead_[1]});
    for (std::size_t i = 0; i < profile_.pieces.size(); ++i) {
      const Piece& p = profile_.pieces[i];
      const cplx q2 = k_ * k_ - p.height;
      const int m = detail::samples_for(q2, p.length);
      for (int j = 0; j <= m; ++j) {
        const double s = (j == m) ? p.length : p.length * j / m;
        const State st = detail::propagate(left_states_[i], q2, s);
        samples_.push_back({p.x0 + s, st[0], st[1]});
      }
    }
    samples_.push_back({profile_.right, right_lead_[0], right_lead_[1]});
  }

  Profile profile_;
  double k_;
  Side side_;
  cplx amplitude_;
  std::vector<State> left_states_;
  State left_lead_{};
  State right_lead_{};
  cplx reflected_{};
  cplx transmitted_{};
  std::vector<FieldSample> samples_;
};

inline WaveField solve_field(const StructureSpec& spec, double k, Side side, cplx amplitude) {
  return WaveField(flatten(spec), k, side, amplitude);
}

/// Incident amplitude that makes Re psi even and Im psi odd at PTR number n
/// of a mirror-symmetric structure of length D.
inline cplx symmetrizing_amplitude(double k, double total_length, int n) {
  const double phase = 0.5 * k * total_length - ((n % 2 != 0) ? 0.5 * pi : 0.0);
  return std::polar(1.0, phase);
}

/// Incident amplitude giving psi(-D/2) = 1 at a reflectionless frequency.
inline cplx unit_edge_amplitude(double k, double total_length) { return std::polar(1.0, 0.5 * k * total_length); }

// ---------------------------------------------------------------------------
// Overlap integrals

/// Closed-form integral of psi^2 over one constant stretch, starting from
/// state (a, b) = (psi, psi'): psi(s) = a cos(qs) + b sin(qs)/q.
inline cplx piece_psi2_integral(const State& start, cplx q2, double length) {
  const cplx u = std::sqrt(q2) * length;
  const cplx a = start[0];
  const cplx b = start[1];
  const cplx s1 = sinc(u);
  const cplx even = 0.5 * length * (1.0 + sinc(2.0 * u));
  const cplx cross = length * length * s1 * s1;
  const cplx odd = 2.0 * length * length * length * one_minus_sinc_over_sq(2.0 * u);
  return a * a * even + a * b * cross + b * b * odd;
}

struct OverlapIntegrals {
  cplx psi2_integral;                  ///< int psi^2 dx over [-D/2, D/2]
  cplx boundary_term;                  ///< i [psi^2(D/2) - psi^2(-D/2)]
  std::vector<cplx> point_values;      ///< psi^2(x_m)
  std::vector<cplx> barrier_integrals; ///< int psi^2 over each barrier
};

inline OverlapIntegrals overlap_integrals(const WaveField& field, const std::vector<double>& positions) {
  OverlapIntegrals out;
  const Profile& prof = field.profile();
  const double k = field.k();
  int barriers = 0;
  for (const auto& p : prof.pieces) barriers = std::max(barriers, p.barrier + 1);
  out.barrier_integrals.assign(static_cast<std::size_t>(barriers), cplx{0.0});
  for (std::size_t i = 0; i < prof.pieces.size(); ++i) {
    const Piece& p = prof.pieces[i];
    const cplx part = piece_psi2_integral(field.piece_states()[i], k * k - p.height, p.length);
    out.psi2_integral += part;
    if (p.barrier >= 0) out.barrier_integrals[static_cast<std::size_t>(p.barrier)] += part;
  }
  const cplx l = field.psi_left_boundary();
  const cplx r = field.psi_right_boundary();
  out.boundary_term = I * (r * r - l * l);
  for (double x : positions) {
    const cplx v = field.psi(x);
    out.point_values.push_back(v * v);
  }
  return out;
}

}  // namespace ptrguard
