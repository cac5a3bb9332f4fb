#pragma once

// Reflectionless modes: complex k where the left-incidence reflection of the
// whole structure vanishes, i.e. zeros of m21(k) of the traveling-wave matrix.
// Real zeros are the perfect transmission resonances; for mirror-symmetric
// real potentials the zero set is closed under complex conjugation.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ptrguard/error.hpp"
#include "ptrguard/numeric.hpp"
#include "ptrguard/potential.hpp"
#include "ptrguard/roots.hpp"
#include "ptrguard/transfer.hpp"

namespace ptrguard {

struct ReflectionlessMode {
  cplx k;
  double residual = 0.0;  ///< |m21 / m22| at k
  bool is_real = false;
};

struct NewtonOptions {
  double step_factor = 1e-7;  ///< derivative step relative to |k|
  double tolerance = 1e-12;   ///< on |dk|
  int max_iterations = 100;
  double duplicate_distance = 1e-9;
  double residual_limit = 1e-10;
};

struct ModeSearch {
  std::vector<ReflectionlessMode> modes;
  std::vector<cplx> failed_seeds;
};

inline bool is_real_mode(cplx k) { return std::abs(k.imag()) < 1e-9 * std::abs(k.real()); }

namespace detail {

inline cplx mode_function(const Profile& prof, cplx k) { return profile_matrix(prof, k).m21; }

inline double mode_residual(const Profile& prof, cplx k) {
  const TransferMatrix m = profile_matrix(prof, k);
  return std::abs(m.m21 / m.m22);
}

/// Newton on F(k) / prod (k - roots). Returns nullopt when it does not settle.
inline std::optional<cplx> newton_deflated(const Profile& prof, cplx k, const std::vector<cplx>& roots,
                                           const NewtonOptions& opt) {
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double h = opt.step_factor * std::max(std::abs(k), 1e-3);
    const cplx f = mode_function(prof, k);
    if (f == 0.0) return k;
    const cplx df = (mode_function(prof, k + h) - mode_function(prof, k - h)) / (2.0 * h);
    cplx log_deriv = df / f;
    for (const cplx& r : roots) log_deriv -= 1.0 / (k - r);
    if (log_deriv == 0.0 || !std::isfinite(std::abs(log_deriv))) return std::nullopt;
    cplx step = -1.0 / log_deriv;
    // Keep steps inside a sane neighbourhood so a flat stretch cannot fling us away.
    const double cap = 0.5 * std::max(std::abs(k), 1.0);
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    k += step;
    if (!(k.real() > 0.0)) return std::nullopt;
    if (std::abs(step) < opt.tolerance) return k;
  }
  return std::nullopt;
}

}  // namespace detail

/// Guard against structures whose reflection vanishes identically.
inline void require_reflecting(const Profile& prof, const std::vector<cplx>& probes) {
  for (const cplx& k : probes) {
    const TransferMatrix m = profile_matrix(prof, k);
    if (std::abs(m.m21) > 1e-13 * std::abs(m.m22)) return;
  }
  throw Error(Errc::trivially_reflectionless, "reflection vanishes at every probe; the structure is transparent");
}

/// Newton with deflation from each seed, polished on the undeflated function.
inline ModeSearch reflectionless_modes(const Profile& prof, const std::vector<cplx>& seeds,
                                       const NewtonOptions& opt = {}) {
  if (seeds.empty()) throw Error(Errc::invalid_argument, "no seeds");
  {
    std::vector<cplx> probes;
    for (const cplx& s : seeds) {
      probes.push_back(s);
      probes.push_back(s * 1.0137 + 0.011);
      probes.push_back(s * 0.9713 + 0.023);
    }
    require_reflecting(prof, probes);
  }
  ModeSearch out;
  std::vector<cplx> roots;
  for (const cplx& seed : seeds) {
    auto k = detail::newton_deflated(prof, seed, roots, opt);
    if (k) k = detail::newton_deflated(prof, *k, {}, opt);
    if (!k || detail::mode_residual(prof, *k) > opt.residual_limit) {
      out.failed_seeds.push_back(seed);
      continue;
    }
    const bool dup = std::any_of(roots.begin(), roots.end(),
                                 [&](const cplx& r) { return std::abs(r - *k) < opt.duplicate_distance; });
    if (dup) {
      out.failed_seeds.push_back(seed);
      continue;
    }
    roots.push_back(*k);
    out.modes.push_back({*k, detail::mode_residual(prof, *k), is_real_mode(*k)});
  }
  return out;
}

inline ModeSearch reflectionless_modes(const StructureSpec& spec, const std::vector<cplx>& seeds,
                                       const NewtonOptions& opt = {}) {
  return reflectionless_modes(flatten(spec), seeds, opt);
}

// ---------------------------------------------------------------------------
// Conjugation closure

struct PtPairReport {
  bool symmetric_structure = false;
  bool closed = false;
  std::vector<int> partner;  ///< index of the conjugate partner, self for real modes, -1 if none
  std::string notice;
};

inline constexpr double pt_match_tolerance = 1e-8;

inline PtPairReport pt_pair_check(const std::vector<ReflectionlessMode>& modes, const StructureSpec& spec) {
  PtPairReport rep;
  rep.symmetric_structure = is_mirror_symmetric(spec);
  rep.partner.assign(modes.size(), -1);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (rep.partner[i] >= 0) continue;
    if (modes[i].is_real) {
      rep.partner[i] = static_cast<int>(i);
      continue;
    }
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      if (rep.partner[j] < 0 && std::abs(modes[j].k - std::conj(modes[i].k)) < pt_match_tolerance) {
        rep.partner[i] = static_cast<int>(j);
        rep.partner[j] = static_cast<int>(i);
        break;
      }
    }
  }
  rep.closed = std::all_of(rep.partner.begin(), rep.partner.end(), [](int p) { return p >= 0; });
  if (!rep.symmetric_structure) {
    rep.notice = "structure is not mirror symmetric: PT symmetry absent, closure not expected";
  } else if (!rep.closed) {
    rep.notice = "some complex modes have no conjugate partner among the seeds";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Exceptional points along symmetric sweeps

struct EpTrace {
  std::vector<double> epsilons;
  std::vector<cplx> ka;
  std::vector<cplx> kb;
  std::vector<double> gap;
  std::optional<double> coalescence_eps;
  bool split_after = false;  ///< a conjugate pair was seen past coalescence
  bool complete = true;      ///< false when continuation aborted early
};

inline constexpr double coalescence_gap = 1e-6;

namespace detail {

/// Im m21 on the real axis. For a mirror-symmetric real structure m21 is
/// purely imaginary there, so its real zeros are the resonances.
inline double real_axis_discriminant(const Profile& prof, double k) { return profile_matrix(prof, k).m21.imag(); }

/// Signed height of the hump of sigma * h between two neighbouring real zeros.
inline double hump_height(const Profile& prof, double lo, double hi, double sigma) {
  auto neg = [&](double k) { return -sigma * real_axis_discriminant(prof, k); };
  const auto [k, v] = minimize(neg, lo, hi);
  return -v;
}

inline bool is_conjugate_pair(cplx a, cplx b) {
  return !is_real_mode(a) && std::abs(a - std::conj(b)) < pt_match_tolerance * std::max(1.0, std::abs(a));
}

struct PairSolve {
  cplx a;
  cplx b;
};

inline std::optional<PairSolve> solve_pair(const Profile& prof, cplx seed_a, cplx seed_b, const NewtonOptions& opt) {
  auto a = newton_deflated(prof, seed_a, {}, opt);
  if (!a) return std::nullopt;
  auto b = newton_deflated(prof, seed_b, {*a}, opt);
  if (!b) return std::nullopt;
  b = newton_deflated(prof, *b, {}, opt);
  if (!b || std::abs(*a - *b) < 1e-14) return std::nullopt;
  if (mode_residual(prof, *a) > 1e-8 || mode_residual(prof, *b) > 1e-8) return std::nullopt;
  return PairSolve{*a, *b};
}

}  // namespace detail

/// Continue two reflectionless eigenvalues in epsilon along a symmetric sweep
/// and locate where they meet.
inline EpTrace trace_exceptional_point(const StructureSpec& spec, cplx seed_a, cplx seed_b,
                                       const std::vector<double>& eps_grid, const NewtonOptions& opt = {}) {
  if (!is_mirror_symmetric(spec.unperturbed())) {
    throw Error(Errc::not_mirror_symmetric, "unperturbed structure is not mirror symmetric");
  }
  if (!is_mirror_symmetric(spec.with_epsilon(1.0))) {
    throw Error(Errc::not_mirror_symmetric, "perturbation is not mirror symmetric");
  }
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] >= 0.0) || (i > 0 && !(eps_grid[i] > eps_grid[i - 1]))) {
      throw Error(Errc::invalid_argument, "epsilon grid must be non-negative and increasing");
    }
  }

  EpTrace tr;
  cplx a = seed_a;
  cplx b = seed_b;
  double eps_prev = eps_grid.empty() ? 0.0 : eps_grid.front();
  bool was_real = true;
  auto record = [&](double e, cplx x, cplx y) {
    if (x.real() > y.real()) std::swap(x, y);
    tr.epsilons.push_back(e);
    tr.ka.push_back(x);
    tr.kb.push_back(y);
    tr.gap.push_back(std::abs(x - y));
  };

  for (double eps : eps_grid) {
    // Step halving from the last accepted epsilon when continuation jumps or fails.
    double reached = eps_prev;
    int halvings = 0;
    double target = eps;
    while (reached < eps || tr.epsilons.empty()) {
      const Profile prof = flatten(spec.with_epsilon(target));
      const double spread = std::abs(a - b);
      // Past a coalescence the real seeds sit on the fold; nudge them apart in Im.
      const double nudge = was_real ? 0.0 : 1e-3 * std::max(spread, 1e-3);
      const auto sol = detail::solve_pair(prof, a + cplx(0.0, nudge), b - cplx(0.0, nudge), opt);
      const double jump_limit = std::max(0.5 * spread, 1e-3 * std::abs(a));
      const bool ok = sol && std::abs(sol->a - a) < jump_limit + 0.05 && std::abs(sol->b - b) < jump_limit + 0.05;
      if (!ok) {
        if (++halvings > 8) {
          tr.complete = false;
          return tr;
        }
        target = 0.5 * (reached + target);
        continue;
      }
      cplx na = sol->a;
      cplx nb = sol->b;
      const bool now_real = is_real_mode(na) && is_real_mode(nb);
      if (was_real && !now_real && !tr.coalescence_eps && !tr.epsilons.empty()) {
        // Bisect on the hump of Im m21 between the last pair of real zeros.
        const double ka = std::min(a.real(), b.real());
        const double kb = std::max(a.real(), b.real());
        const double margin = 0.5 * (kb - ka);
        const double mid = 0.5 * (ka + kb);
        const double sigma =
            (detail::real_axis_discriminant(flatten(spec.with_epsilon(reached)), mid) >= 0.0) ? 1.0 : -1.0;
        double lo = reached;
        double hi = target;
        for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
          const double m = 0.5 * (lo + hi);
          const double hump = detail::hump_height(flatten(spec.with_epsilon(m)), ka - margin, kb + margin, sigma);
          (hump > 0.0 ? lo : hi) = m;
        }
        tr.coalescence_eps = 0.5 * (lo + hi);
        const Profile pc = flatten(spec.with_epsilon(*tr.coalescence_eps));
        auto neg = [&](double k) { return -sigma * detail::real_axis_discriminant(pc, k); };
        const double k_ep = minimize(neg, ka - margin, kb + margin).first;
        const auto at = detail::solve_pair(pc, cplx(k_ep, 1e-6), cplx(k_ep, -1e-6), opt);
        if (at) record(*tr.coalescence_eps, at->a, at->b);
        else record(*tr.coalescence_eps, k_ep, k_ep);
      }
      if (!now_real && tr.coalescence_eps && detail::is_conjugate_pair(na, nb)) tr.split_after = true;
      was_real = was_real && now_real;
      a = na;
      b = nb;
      record(target, a, b);
      reached = target;
      target = eps;
      halvings = 0;
    }
    eps_prev = eps;
  }
  return tr;
}

}  // namespace ptrguard
