#pragma once

// Structure JSON input and locale-free CSV output.
//
// Schema (lengths in units of d, heights in 1/d^2, strengths in 1/d):
//   { "d": 1, "N": 8,
//     "cell": {"segments": [{"len": .., "height": ..}], "deltas": [{"pos": .., "c": ..}]},
//     "perturbation": {"epsilon": .., "deltas": [{"pos": .., "c": ..}], "height_offsets": [..]} }
// Cell delta positions are cell-local, perturbation positions are global.
// Everything is normalized by d on input so the engine always works with d = 1.
// Needs nlohmann/json on the include path.

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ptrguard/error.hpp"
#include "ptrguard/modes.hpp"
#include "ptrguard/perturb.hpp"
#include "ptrguard/potential.hpp"

namespace ptrguard::io {

using nlohmann::json;

struct LoadedStructure {
  double d = 1.0;
  StructureSpec spec;  ///< normalized to d = 1, epsilon from the file (0 when absent)
};

namespace detail {

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(Errc::invalid_argument, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.contains(key)) throw Error(Errc::invalid_argument, "unknown key '" + key + "' in " + where);
  }
}

inline double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(Errc::invalid_argument, where + "." + key + " is required");
  const json& v = obj.at(key);
  if (!v.is_number()) throw Error(Errc::invalid_argument, where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(Errc::invalid_argument, where + "." + key + " must be finite");
  return x;
}

inline std::vector<DiracScatterer> deltas(const json& arr, const std::string& where, double d) {
  if (!arr.is_array()) throw Error(Errc::invalid_argument, where + " must be an array");
  std::vector<DiracScatterer> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    only_keys(arr[i], at, {"pos", "c"});
    out.push_back({number(arr[i], "pos", at) / d, number(arr[i], "c", at) * d});
  }
  return out;
}

}  // namespace detail

inline LoadedStructure parse_structure(const json& root) {
  detail::only_keys(root, "structure", {"d", "N", "cell", "perturbation"});
  const double d = detail::number(root, "d", "structure");
  if (!(d > 0.0)) throw Error(Errc::invalid_argument, "structure.d must be positive");
  if (!root.contains("N") || !root.at("N").is_number_integer()) {
    throw Error(Errc::invalid_argument, "structure.N must be an integer");
  }
  const auto n = root.at("N").get<long long>();
  if (n < 1 || n > 100000) throw Error(Errc::invalid_argument, "structure.N must be at least 1 (no cells given)");
  if (!root.contains("cell")) throw Error(Errc::invalid_argument, "structure.cell is required");

  const json& cell = root.at("cell");
  detail::only_keys(cell, "cell", {"segments", "deltas"});
  if (!cell.contains("segments") || !cell.at("segments").is_array() || cell.at("segments").empty()) {
    throw Error(Errc::invalid_argument, "cell.segments must be a non-empty array");
  }
  std::vector<Segment> segs;
  const json& js = cell.at("segments");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string at = "cell.segments[" + std::to_string(i) + "]";
    detail::only_keys(js[i], at, {"len", "height"});
    segs.push_back({detail::number(js[i], "len", at) / d, detail::number(js[i], "height", at) * d * d});
  }
  std::vector<DiracScatterer> cell_deltas;
  if (cell.contains("deltas")) cell_deltas = detail::deltas(cell.at("deltas"), "cell.deltas", d);

  StructureSpec base = build_periodic(UnitCell(std::move(segs), std::move(cell_deltas)), static_cast<int>(n));
  if (!root.contains("perturbation")) return {d, base};

  const json& pj = root.at("perturbation");
  detail::only_keys(pj, "perturbation", {"epsilon", "deltas", "height_offsets"});
  const double eps = pj.contains("epsilon") ? detail::number(pj, "epsilon", "perturbation") : 0.0;
  std::vector<DiracScatterer> pd;
  if (pj.contains("deltas")) pd = detail::deltas(pj.at("deltas"), "perturbation.deltas", d);
  std::optional<std::vector<double>> offsets;
  if (pj.contains("height_offsets")) {
    const json& ho = pj.at("height_offsets");
    if (!ho.is_array()) throw Error(Errc::invalid_argument, "perturbation.height_offsets must be an array");
    offsets.emplace();
    for (const auto& v : ho) {
      if (!v.is_number()) throw Error(Errc::invalid_argument, "perturbation.height_offsets entries must be numbers");
      offsets->push_back(v.get<double>() * d * d);
    }
  }
  return {d, overlay_perturbation(base, std::move(pd), std::move(offsets), eps)};
}

inline LoadedStructure parse_structure_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::invalid_argument, std::string("malformed JSON: ") + e.what());
  }
  return parse_structure(root);
}

inline LoadedStructure load_structure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_argument, "cannot open input '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_structure_text(ss.str());
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip is not what we want here: always 17 significant digits.
inline std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<const char*> header) : out_(out), columns_(header.size()) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  CsvWriter& row(std::initializer_list<std::string> cells) {
    if (cells.size() != columns_) throw Error(Errc::invalid_argument, "CSV row width mismatch");
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
    return *this;
  }

 private:
  std::ostream& out_;
  std::size_t columns_;
};

inline std::string fmt(double v) { return format_real(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

/// Lengths scale with d, wavenumbers with 1/d.
inline void write_field_csv(std::ostream& out, const WaveField& f, double d = 1.0) {
  CsvWriter w(out, {"x", "re_psi", "im_psi", "abs_psi", "re_dpsi", "im_dpsi"});
  for (const auto& s : f.samples()) {
    w.row({fmt(s.x * d), fmt(s.psi.real()), fmt(s.psi.imag()), fmt(std::abs(s.psi)), fmt(s.dpsi.real() / d),
           fmt(s.dpsi.imag() / d)});
  }
}

inline void write_shift_csv(std::ostream& out, const std::vector<ShiftResult>& rows, double d = 1.0) {
  CsvWriter w(out, {"n", "k0", "re_k1", "im_k1", "protected"});
  for (const auto& r : rows) {
    w.row({fmt(r.n), fmt(r.k0 / d), fmt(r.k1.real() / d), fmt(r.k1.imag() / d), fmt(r.is_protected)});
  }
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& s, double d = 1.0) {
  CsvWriter w(out, {"epsilon", "peak_k", "peak_T", "one_minus_T"});
  for (std::size_t i = 0; i < s.epsilons.size(); ++i) {
    w.row({fmt(s.epsilons[i]), fmt(s.peak_k[i] / d), fmt(s.peak_T[i]), fmt(s.one_minus_T[i])});
  }
}

inline void write_modes_csv(std::ostream& out, const std::vector<ReflectionlessMode>& modes, double d = 1.0) {
  CsvWriter w(out, {"re_k", "im_k", "residual", "is_real"});
  for (const auto& m : modes) w.row({fmt(m.k.real() / d), fmt(m.k.imag() / d), fmt(m.residual), fmt(m.is_real)});
}

inline void write_ep_csv(std::ostream& out, const EpTrace& t, double d = 1.0) {
  CsvWriter w(out, {"epsilon", "re_ka", "im_ka", "re_kb", "im_kb", "gap"});
  for (std::size_t i = 0; i < t.epsilons.size(); ++i) {
    w.row({fmt(t.epsilons[i]), fmt(t.ka[i].real() / d), fmt(t.ka[i].imag() / d), fmt(t.kb[i].real() / d),
           fmt(t.kb[i].imag() / d), fmt(t.gap[i] / d)});
  }
}

/// JSON numbers are written through the same 17-digit formatter so reports
/// stay byte-identical across runs.
inline std::string design_report_json(const std::vector<int>& targets, const std::vector<double>& positions,
                                      const DesignResult& r, double d = 1.0) {
  std::ostringstream o;
  auto list = [&](const std::vector<double>& v, double scale) {
    o << '[';
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << format_real(v[i] * scale);
    o << ']';
  };
  o << "{\n  \"targets\": [";
  for (std::size_t i = 0; i < targets.size(); ++i) o << (i ? ", " : "") << targets[i];
  o << "],\n  \"positions\": ";
  list(positions, d);
  o << ",\n  \"strengths\": ";
  list(r.strengths, 1.0 / d);
  o << ",\n  \"residuals\": ";
  list(r.residuals, 1.0 / d);
  o << ",\n  \"condition_number\": " << format_real(r.condition_number) << "\n}\n";
  return o.str();
}

}  // namespace ptrguard::io
