#pragma once

// Command-line front end. Everything except main() lives here so the tests
// can drive run() without spawning processes.
//
// Units: the structure file is normalized by its own "d"; k-range flags,
// positions and epsilon are read in those normalized units. --d only rescales
// what is written (k -> k/d, x -> x d).

#include <CLI11.hpp>

#include <charconv>
#include <complex>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ptrguard/io.hpp"
#include "ptrguard/ptrguard.hpp"

namespace ptrguard::cli {

enum class Command { spectrum, ptrs, field, shift, design, pairs, modes, sweep, ep_trace };

struct RunConfig {
  Command command = Command::spectrum;
  std::string input;
  std::string out;  ///< empty: stdout
  double kmin = 0.01;
  double kmax = 4.0;
  int points = 2000;
  std::optional<double> epsilon;
  std::vector<int> protect;
  std::optional<PositionSet> positions;
  std::map<int, double> fix;
  std::vector<cplx> seeds;
  Side side = Side::left;
  double d = 1.0;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;

// ---------------------------------------------------------------------------
// Flag value parsers

inline double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(Errc::invalid_argument, what + ": cannot read '" + std::string(s) + "' as a number");
  }
  return v;
}

inline int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(Errc::invalid_argument, what + ": cannot read '" + std::string(s) + "' as an integer");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// "2.1", "2.1+0.05j", "2.1-3e-4j", "-0.5j"
inline cplx parse_complex(std::string_view s) {
  if (s.empty()) throw Error(Errc::invalid_argument, "--seeds: empty seed");
  if (s.back() != 'j' && s.back() != 'i') return {parse_double(s, "--seeds"), 0.0};
  std::string_view body = s.substr(0, s.size() - 1);
  std::size_t split_at = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split_at = i;
      break;
    }
  }
  if (split_at == std::string_view::npos) return {0.0, parse_double(body, "--seeds")};
  std::string_view im = body.substr(split_at);
  if (im.front() == '+') im.remove_prefix(1);
  return {parse_double(body.substr(0, split_at), "--seeds"), parse_double(im, "--seeds")};
}

inline PositionSet parse_positions(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::invalid_argument, "--positions: expected centers:p,... | edges:p,... | abs:x,...");
  }
  const std::string_view kind = s.substr(0, colon);
  const auto items = split(s.substr(colon + 1), ',');
  PositionSet set;
  if (kind == "centers" || kind == "edges") {
    set.kind = (kind == "centers") ? Placement::centers : Placement::edges;
    for (auto it : items) set.indices.push_back(parse_int(it, "--positions"));
  } else if (kind == "abs") {
    set.kind = Placement::absolute;
    for (auto it : items) set.coordinates.push_back(parse_double(it, "--positions"));
  } else {
    throw Error(Errc::invalid_argument, "--positions: unknown kind '" + std::string(kind) + "'");
  }
  return set;
}

/// "c1=12,c3=-2" -> {0: 12, 2: -2}
inline std::map<int, double> parse_fix(std::string_view s) {
  std::map<int, double> out;
  for (auto item : split(s, ',')) {
    const auto eq = item.find('=');
    if (item.size() < 4 || item.front() != 'c' || eq == std::string_view::npos) {
      throw Error(Errc::invalid_argument, "--fix: expected cI=value, got '" + std::string(item) + "'");
    }
    const int idx = parse_int(item.substr(1, eq - 1), "--fix");
    if (idx < 1) throw Error(Errc::invalid_argument, "--fix: indices start at c1");
    out[idx - 1] = parse_double(item.substr(eq + 1), "--fix");
  }
  return out;
}

inline Command parse_command(const std::string& name) {
  static const std::map<std::string, Command> table{
      {"spectrum", Command::spectrum}, {"ptrs", Command::ptrs},   {"field", Command::field},
      {"shift", Command::shift},       {"design", Command::design}, {"pairs", Command::pairs},
      {"modes", Command::modes},       {"sweep", Command::sweep}, {"ep-trace", Command::ep_trace}};
  const auto it = table.find(name);
  if (it == table.end()) throw Error(Errc::invalid_argument, "unknown command '" + name + "'");
  return it->second;
}

/// Throws CLI::ParseError for flag syntax problems and Error for bad values.
inline RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Perfect transmission resonances of finite periodic potentials"};
  std::string command;
  std::string positions, fix, seeds, protect, side = "left";
  std::optional<double> epsilon;
  RunConfig cfg;
  app.add_option("command", command, "spectrum|ptrs|field|shift|design|pairs|modes|sweep|ep-trace")->required();
  app.add_option("--input", cfg.input, "structure JSON")->required();
  app.add_option("--out", cfg.out, "output file (default stdout)");
  app.add_option("--kmin", cfg.kmin, "lower k (1/d); the field frequency for `field`");
  app.add_option("--kmax", cfg.kmax, "upper k (1/d)");
  app.add_option("--points", cfg.points, "grid size");
  app.add_option("--epsilon", epsilon, "perturbation scale (largest value for sweeps)");
  app.add_option("--protect", protect, "resonance numbers n[,n...]");
  app.add_option("--positions", positions, "centers:p,... | edges:p,... | abs:x,...");
  app.add_option("--fix", fix, "fixed strengths cI=value[,...]");
  app.add_option("--seeds", seeds, "complex seeds re+imj[,...]");
  app.add_option("--side", side, "incidence side")->check(CLI::IsMember({"left", "right"}));
  app.add_option("--d", cfg.d, "output length unit");
  app.parse(argc, argv);

  cfg.command = parse_command(command);
  cfg.epsilon = epsilon;
  cfg.side = (side == "right") ? Side::right : Side::left;
  if (!protect.empty()) {
    for (auto it : split(protect, ',')) cfg.protect.push_back(parse_int(it, "--protect"));
  }
  if (!positions.empty()) cfg.positions = parse_positions(positions);
  if (!fix.empty()) cfg.fix = parse_fix(fix);
  if (!seeds.empty()) {
    for (auto it : split(seeds, ',')) cfg.seeds.push_back(parse_complex(it));
  }
  if (!(cfg.d > 0.0)) throw Error(Errc::invalid_argument, "--d must be positive");
  if (cfg.points < 1) throw Error(Errc::invalid_argument, "--points must be positive");
  return cfg;
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline StructureSpec at_epsilon(const StructureSpec& spec, const RunConfig& cfg) {
  return cfg.epsilon ? spec.with_epsilon(*cfg.epsilon) : spec;
}

inline std::vector<PtrRecord> base_ptrs(const StructureSpec& spec, const RunConfig& cfg) {
  if (!(cfg.kmin > 0.0) || !(cfg.kmax > cfg.kmin)) throw Error(Errc::invalid_argument, "need 0 < --kmin < --kmax");
  return first_band_ptrs(spec.cell(), spec.n_cells(), cfg.kmin, cfg.kmax);
}

inline void require(bool ok, const std::string& message) {
  if (!ok) throw Error(Errc::invalid_argument, message);
}

inline void cmd_spectrum(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out) {
  require(cfg.kmin > 0.0 && cfg.kmax > cfg.kmin, "need 0 < --kmin < --kmax");
  require(cfg.points >= 2, "--points must be at least 2");
  const Profile prof = flatten(at_epsilon(spec, cfg));
  io::CsvWriter w(out, {"k", "T_N"});
  for (int i = 0; i < cfg.points; ++i) {
    const double k = cfg.kmin + (cfg.kmax - cfg.kmin) * i / (cfg.points - 1);
    w.row({io::fmt(k / cfg.d), io::fmt(structure_transmission(prof, k))});
  }
}

inline void cmd_ptrs(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out) {
  require(cfg.kmin > 0.0 && cfg.kmax > cfg.kmin, "need 0 < --kmin < --kmax");
  const auto bands = find_bands(spec.cell(), cfg.kmin, cfg.kmax);
  if (bands.empty()) throw Error(Errc::root_not_bracketed, "no pass band in [--kmin, --kmax]");
  const Profile prof = flatten(spec.unperturbed());
  io::CsvWriter w(out, {"band", "n", "phi_n", "k", "kind", "T_N"});
  for (const auto& band : bands) {
    // A band cut by the scan window is reported only if its resonances bracket.
    std::vector<PtrRecord> recs;
    try {
      recs = find_ptrs(spec.cell(), spec.n_cells(), band);
    } catch (const Error& e) {
      if (&band == &bands.front() || e.code() != Errc::root_not_bracketed) throw;
      continue;
    }
    for (const auto& r : recs) {
      w.row({io::fmt(r.band_index), io::fmt(r.n), io::fmt(r.phi_n), io::fmt(r.k / cfg.d),
             r.kind == PtrKind::bloch ? "bloch" : "accidental", io::fmt(structure_transmission(prof, r.k))});
    }
  }
}

inline void cmd_field(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out) {
  const StructureSpec s = at_epsilon(spec, cfg);
  double k = cfg.kmin;
  cplx amplitude = 1.0;
  if (!cfg.protect.empty()) {
    require(cfg.protect.size() == 1, "field takes a single --protect n");
    // --kmin/--kmax bound the band search here.
    const auto ptrs = base_ptrs(spec, cfg);
    const PtrRecord& p = ptr_by_number(ptrs, cfg.protect.front());
    k = p.k;
    amplitude = symmetrizing_amplitude(k, s.total_length(), p.n);
  }
  require(k > 0.0, "field needs --kmin k > 0 or --protect n");
  const WaveField f(flatten(s), k, cfg.side, amplitude);
  io::write_field_csv(out, f, cfg.d);
}

inline Perturbation file_perturbation(const StructureSpec& spec) {
  const Perturbation& v1 = spec.perturbation();
  require(!v1.empty(), "the structure has no perturbation block");
  return v1;
}

inline void cmd_shift(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out) {
  const Perturbation v1 = file_perturbation(spec);
  const auto ptrs = base_ptrs(spec, cfg);
  io::write_shift_csv(out, shift_table(spec.unperturbed(), ptrs, v1), cfg.d);
}

struct DesignRun {
  std::vector<double> positions;
  DesignResult result;
};

inline DesignRun run_design(const StructureSpec& spec, const RunConfig& cfg, const std::vector<PtrRecord>& ptrs) {
  require(cfg.positions.has_value(), "--positions is required");
  require(!cfg.protect.empty(), "--protect is required");
  const StructureSpec base = spec.unperturbed();
  DesignRun run;
  run.positions = resolve_positions(base, *cfg.positions);
  run.result = design_strengths(base, ptrs, {run.positions, cfg.fix, cfg.protect});
  return run;
}

inline void cmd_design(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out) {
  const auto ptrs = base_ptrs(spec, cfg);
  const DesignRun run = run_design(spec, cfg, ptrs);
  out << io::design_report_json(cfg.protect, run.positions, run.result, cfg.d);
}

inline void cmd_pairs(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.protect.size() == 1, "pairs takes a single --protect n");
  const auto ptrs = base_ptrs(spec, cfg);
  const DesignRun run = run_design(spec, cfg, ptrs);
  const PairingReport rep = pairing_check(spec.unperturbed(), ptrs, *cfg.positions, run.result, cfg.protect.front());
  io::CsvWriter w(out, {"n", "k0", "re_k1", "im_k1", "protected", "required"});
  for (const auto& r : rep.table) {
    const bool req = std::find(rep.required.begin(), rep.required.end(), r.n) != rep.required.end();
    w.row({io::fmt(r.n), io::fmt(r.k0 / cfg.d), io::fmt(r.k1.real() / cfg.d), io::fmt(r.k1.imag() / cfg.d),
           io::fmt(r.is_protected), io::fmt(req)});
  }
  if (!rep.satisfied) {
    err << "pairing violated for n =";
    for (int m : rep.violations) err << ' ' << m;
    err << '\n';
    throw Error(Errc::not_converged, "pairing prediction not met");
  }
}

inline std::vector<cplx> default_seeds(const StructureSpec& spec, const RunConfig& cfg) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  std::vector<cplx> seeds;
  for (const auto& p : base_ptrs(spec, cfg)) seeds.push_back(p.k);
  return seeds;
}

inline void cmd_modes(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const StructureSpec s = at_epsilon(spec, cfg);
  const ModeSearch ms = reflectionless_modes(s, default_seeds(spec, cfg));
  for (const cplx& seed : ms.failed_seeds) {
    err << "seed " << io::format_real(seed.real()) << (seed.imag() < 0 ? "" : "+") << io::format_real(seed.imag())
        << "j did not converge to a new mode\n";
  }
  if (ms.modes.empty()) throw Error(Errc::not_converged, "no seed converged");
  io::write_modes_csv(out, ms.modes, cfg.d);
  const PtPairReport pt = pt_pair_check(ms.modes, s);
  if (!pt.notice.empty()) err << pt.notice << '\n';
}

inline double max_epsilon(const StructureSpec& spec, const RunConfig& cfg) {
  const double e = cfg.epsilon.value_or(spec.epsilon());
  require(e > 0.0, "sweeps need a positive --epsilon (largest value)");
  return e;
}

inline void cmd_sweep(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.protect.size() == 1, "sweep takes a single --protect n");
  file_perturbation(spec);
  const auto ptrs = base_ptrs(spec, cfg);
  const PtrRecord& p = ptr_by_number(ptrs, cfg.protect.front());
  const double e_max = max_epsilon(spec, cfg);
  // Geometric grid over two decades ending at e_max.
  std::vector<double> grid;
  const int n = std::max(cfg.points, 2);
  for (int i = 0; i < n; ++i) grid.push_back(e_max * std::pow(100.0, static_cast<double>(i - (n - 1)) / (n - 1)));
  const SweepResult sw = epsilon_sweep(spec, p, grid, resonance_half_spacing(ptrs, p.n));
  io::write_sweep_csv(out, sw, cfg.d);
  err << "fitted slope " << io::format_real(sw.fitted_slope) << '\n';
  if (sw.lost_after) err << "peak lost after epsilon = " << io::format_real(*sw.lost_after) << '\n';
}

inline void cmd_ep_trace(const StructureSpec& spec, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  file_perturbation(spec);
  cplx a, b;
  if (cfg.seeds.size() == 2) {
    a = cfg.seeds[0];
    b = cfg.seeds[1];
  } else {
    require(cfg.protect.size() == 2, "ep-trace needs two --seeds or two --protect numbers");
    const auto ptrs = base_ptrs(spec, cfg);
    a = ptr_by_number(ptrs, cfg.protect[0]).k;
    b = ptr_by_number(ptrs, cfg.protect[1]).k;
  }
  const double e_max = max_epsilon(spec, cfg);
  std::vector<double> grid;
  const int n = std::max(cfg.points, 2);
  for (int i = 0; i < n; ++i) grid.push_back(e_max * i / (n - 1));
  const EpTrace tr = trace_exceptional_point(spec, a, b, grid);
  io::write_ep_csv(out, tr, cfg.d);
  if (tr.coalescence_eps) {
    err << "coalescence at epsilon = " << io::format_real(*tr.coalescence_eps)
        << (tr.split_after ? ", conjugate pair beyond it\n" : "\n");
  } else {
    err << "no coalescence in the epsilon range\n";
  }
  if (!tr.complete) throw Error(Errc::root_lost, "continuation lost a root; partial trace written");
}

}  // namespace detail

/// Execute one command. Returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& err = std::cerr) {
  std::ostringstream buffer;
  int status = exit_ok;
  try {
    const io::LoadedStructure loaded = io::load_structure(cfg.input);
    const StructureSpec& spec = loaded.spec;
    switch (cfg.command) {
      case Command::spectrum: detail::cmd_spectrum(spec, cfg, buffer); break;
      case Command::ptrs: detail::cmd_ptrs(spec, cfg, buffer); break;
      case Command::field: detail::cmd_field(spec, cfg, buffer); break;
      case Command::shift: detail::cmd_shift(spec, cfg, buffer); break;
      case Command::design: detail::cmd_design(spec, cfg, buffer); break;
      case Command::pairs: detail::cmd_pairs(spec, cfg, buffer, err); break;
      case Command::modes: detail::cmd_modes(spec, cfg, buffer, err); break;
      case Command::sweep: detail::cmd_sweep(spec, cfg, buffer, err); break;
      case Command::ep_trace: detail::cmd_ep_trace(spec, cfg, buffer, err); break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    status = is_validation_error(e.code()) ? exit_validation : exit_numerical;
    if (cfg.command != Command::ep_trace || e.code() != Errc::root_lost) return status;
  }
  if (cfg.out.empty()) {
    std::cout << buffer.str();
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << cfg.out << "'\n";
      return exit_validation;
    }
    f << buffer.str();
  }
  return status;
}

inline constexpr const char* usage =
    "usage: ptrguard <command> --input structure.json [options]\n"
    "commands: spectrum ptrs field shift design pairs modes sweep ep-trace\n"
    "options: --out --kmin --kmax --points --epsilon --protect --positions --fix --seeds --side --d\n";

/// argv entry point shared by the executable and the tests.
inline int main_with_args(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << usage;
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  }
  return run(cfg, err);
}

}  // namespace ptrguard::cli
