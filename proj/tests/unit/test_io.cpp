#include "common.hpp"

#include <sstream>

#include "ptrguard/io.hpp"

using namespace testing;
using ptrguard::io::json;

namespace {

Errc parse_error(const std::string& text) {
  try {
    io::parse_structure_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for " << text);
  return Errc::not_converged;
}

}  // namespace

TEST_CASE("structure files are normalized by d") {
  const auto loaded = io::parse_structure_text(R"({
    "d": 2.0, "N": 3,
    "cell": {"segments": [{"len": 0.5, "height": 0}, {"len": 1.0, "height": 8.0}, {"len": 0.5, "height": 0}],
             "deltas": [{"pos": 0.0, "c": 3.0}]},
    "perturbation": {"epsilon": 0.1, "deltas": [{"pos": -1.0, "c": 4.0}], "height_offsets": [1.0, 2.0, 1.0]}
  })");
  CHECK(loaded.d == 2.0);
  const auto& s = loaded.spec;
  CHECK(s.n_cells() == 3);
  CHECK(s.period() == Catch::Approx(1.0));
  CHECK(s.cell().segments()[1].length == 0.5);
  CHECK(s.cell().segments()[1].height == 32.0);
  CHECK(s.cell().deltas()[0].strength == 6.0);
  CHECK(s.epsilon() == 0.1);
  CHECK(s.perturbation().deltas[0].position == -0.5);
  CHECK(s.perturbation().deltas[0].strength == 8.0);
  CHECK(s.perturbation().height_offsets == std::vector<double>{4.0, 8.0, 4.0});

  // Same physics in d = 1 units: identical transmission at k d fixed.
  const auto unit = io::parse_structure_text(R"({
    "d": 1, "N": 3,
    "cell": {"segments": [{"len": 0.25, "height": 0}, {"len": 0.5, "height": 32.0}, {"len": 0.25, "height": 0}],
             "deltas": [{"pos": 0.0, "c": 6.0}]}
  })");
  for (double k : {1.0, 3.3}) {
    CHECK(structure_transmission(flatten(s.unperturbed()), k) ==
          Catch::Approx(structure_transmission(flatten(unit.spec), k)).epsilon(1e-12));
  }
}

TEST_CASE("structure files are validated") {
  const std::string cell = R"("cell": {"segments": [{"len": 1, "height": 2}]})";
  CHECK(parse_error(R"({"d": 1, "N": 0, )" + cell + "}") == Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 1, "N": 2.5, )" + cell + "}") == Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 0, "N": 2, )" + cell + "}") == Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 1, "N": 2, "colour": 1, )" + cell + "}") == Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 1, "N": 2, "cell": {"segments": [{"len": 1, "hieght": 2}]}})") ==
        Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 1, "N": 2, "cell": {"segments": []}})") == Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 1, "N": 2, )" + cell + R"(, "perturbation": {"deltas": [{"pos": 5, "c": 1}]}})") ==
        Errc::out_of_region);
  CHECK(parse_error(R"({"d": 1, "N": 2, )" + cell + R"(, "perturbation": {"height_offsets": [1]}})") ==
        Errc::invalid_argument);
  CHECK(parse_error(R"({"d": 1, "N": 2, )" + cell + R"(, "perturbation": {"eps": 0.1}})") == Errc::invalid_argument);
  CHECK(parse_error("{not json") == Errc::invalid_argument);
  CHECK_THROWS_AS(io::load_structure("/nonexistent/structure.json"), Error);
}

TEST_CASE("number formatting and CSV") {
  CHECK(io::format_real(0.1) == "0.10000000000000001");
  CHECK(io::format_real(2.0) == "2");
  CHECK(io::format_real(-1.5e-20) == "-1.5000000000000001e-20");
  CHECK(io::fmt(true) == "1");
  CHECK(io::fmt(7) == "7");

  std::ostringstream out;
  io::CsvWriter w(out, {"a", "b"});
  w.row({"1", "2"});
  CHECK_THROWS_AS(w.row({"1"}), Error);
  CHECK(out.str() == "a,b\n1,2\n");
}

TEST_CASE("writers scale lengths and wavenumbers by d") {
  ShiftResult r{3, 2.0, cplx(0.5, -0.25), false};
  std::ostringstream out;
  io::write_shift_csv(out, {r}, 2.0);
  CHECK(out.str() == "n,k0,re_k1,im_k1,protected\n3,1,0.25,-0.125,0\n");

  std::ostringstream modes;
  io::write_modes_csv(modes, {{cplx(4.0, 1.0), 1e-13, false}}, 4.0);
  CHECK(modes.str().starts_with("re_k,im_k,residual,is_real\n1,0.25,"));
}

TEST_CASE("design report round trip") {
  DesignResult r;
  r.strengths = {12.0, -4.9705627484761};
  r.residuals = {1e-15};
  r.condition_number = 1.0;
  const std::string text = io::design_report_json({1}, {-3.5, -1.5}, r, 2.0);
  const json j = json::parse(text);
  CHECK(j.at("targets") == json::array({1}));
  CHECK(j.at("positions")[0].get<double>() == -7.0);
  CHECK(j.at("strengths")[1].get<double>() == -4.9705627484761 / 2.0);
  CHECK(j.at("condition_number").get<double>() == 1.0);
  CHECK(io::design_report_json({1}, {-3.5, -1.5}, r, 2.0) == text);
}
