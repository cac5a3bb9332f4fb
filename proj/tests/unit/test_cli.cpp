#include "common.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <sstream>

#include "cli.hpp"

using namespace testing;
namespace cli = ptrguard::cli;

namespace {

const std::string data_dir = PTRGUARD_DATA_DIR;

std::string data(const std::string& name) { return data_dir + "/" + name; }

struct Outcome {
  int status = 0;
  std::string out;
  std::string err;
};

// Runs the CLI with --out pointed at a temp file.
Outcome run(std::vector<std::string> args) {
  static int counter = 0;
  const auto path = std::filesystem::temp_directory_path() /
                    ("ptrguard_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".out");
  args.insert(args.begin(), "ptrguard");
  args.push_back("--out");
  args.push_back(path.string());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  Outcome o;
  o.status = cli::main_with_args(static_cast<int>(argv.size()), argv.data(), err);
  o.err = err.str();
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  o.out = ss.str();
  std::filesystem::remove(path);
  return o;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("argument parsers") {
  CHECK(cli::parse_complex("2.1+0.05j") == cplx(2.1, 0.05));
  CHECK(cli::parse_complex("2.1-0.05j") == cplx(2.1, -0.05));
  CHECK(cli::parse_complex("2.1") == cplx(2.1, 0.0));
  CHECK(cli::parse_complex("-0.5j") == cplx(0.0, -0.5));
  CHECK(cli::parse_complex("1e-3+2e-2j") == cplx(1e-3, 2e-2));
  CHECK_THROWS_AS(cli::parse_complex("abc"), Error);
  CHECK_THROWS_AS(cli::parse_complex(""), Error);

  const auto c = cli::parse_positions("centers:1,3");
  CHECK(c.kind == Placement::centers);
  CHECK(c.indices == std::vector<int>{1, 3});
  const auto a = cli::parse_positions("abs:-3.5,0.25");
  CHECK(a.kind == Placement::absolute);
  CHECK(a.coordinates == std::vector<double>{-3.5, 0.25});
  CHECK_THROWS_AS(cli::parse_positions("middles:1"), Error);
  CHECK_THROWS_AS(cli::parse_positions("edges:1,x"), Error);
  CHECK_THROWS_AS(cli::parse_positions("1,2"), Error);

  const auto f = cli::parse_fix("c1=12,c3=-2.5");
  CHECK(f.at(0) == 12.0);
  CHECK(f.at(2) == -2.5);
  CHECK_THROWS_AS(cli::parse_fix("c0=1"), Error);
  CHECK_THROWS_AS(cli::parse_fix("x1=1"), Error);

  CHECK(cli::parse_command("ep-trace") == cli::Command::ep_trace);
  CHECK_THROWS_AS(cli::parse_command("spectra"), Error);
}

TEST_CASE("exit codes") {
  CHECK(run({"ptrs", "--input", data("barriers8.json")}).status == cli::exit_ok);
  CHECK(run({"ptrs", "--input", data("no_cells.json")}).status == cli::exit_validation);
  CHECK(run({"ptrs", "--input", data("missing.json")}).status == cli::exit_validation);
  CHECK(run({"ptrs"}).status == cli::exit_validation);
  CHECK(run({"frobnicate", "--input", data("barriers8.json")}).status == cli::exit_validation);
  CHECK(run({"ptrs", "--input", data("barriers8.json"), "--kmin", "2.05", "--kmax", "2.06"}).status ==
        cli::exit_numerical);
  CHECK(run({"modes", "--input", data("barriers8.json"), "--kmax", "3.5", "--epsilon", "0.1"}).status ==
        cli::exit_ok);

  // Every strength fixed leaves nothing to solve for.
  const auto bad = run({"pairs", "--input", data("barriers8.json"), "--kmax", "3.5", "--protect", "1", "--positions",
                        "centers:1,3", "--fix", "c1=12,c2=1"});
  CHECK(bad.status == cli::exit_validation);
}

TEST_CASE("ptrs and spectrum agree") {
  const auto p = run({"ptrs", "--input", data("barriers8.json"), "--kmax", "3.5"});
  REQUIRE(p.status == 0);
  const auto rows = csv(p.out);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0] == std::vector<std::string>{"band", "n", "phi_n", "k", "kind", "T_N"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double k = std::stod(rows[i][3]);
    CHECK(std::abs(k - barrier_ptrs()[i - 1].k) < 1e-12);
    const auto s = run({"spectrum", "--input", data("barriers8.json"), "--kmin", rows[i][3], "--kmax",
                        std::to_string(k + 1e-3), "--points", "2"});
    REQUIRE(s.status == 0);
    const auto srows = csv(s.out);
    CHECK(std::stod(srows[1][1]) == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("output is deterministic") {
  const std::vector<std::string> args{"design", "--input", data("barriers8.json"), "--kmax", "3.5", "--protect", "1",
                                      "--positions", "centers:1,3", "--fix", "c1=12"};
  const auto a = run(args);
  const auto b = run(args);
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  const auto j = ptrguard::io::json::parse(a.out);
  CHECK(j.at("strengths")[1].get<double>() == Catch::Approx(-4.9705627484761).margin(1e-9));
}

TEST_CASE("--d rescales the output only") {
  const auto a = run({"ptrs", "--input", data("barriers8.json"), "--kmax", "3.5"});
  const auto b = run({"ptrs", "--input", data("barriers8.json"), "--kmax", "3.5", "--d", "2"});
  const auto ra = csv(a.out);
  const auto rb = csv(b.out);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 1; i < ra.size(); ++i) {
    CHECK(std::stod(rb[i][3]) == Catch::Approx(std::stod(ra[i][3]) / 2.0).epsilon(1e-15));
    CHECK(rb[i][5] == ra[i][5]);
  }
  CHECK(run({"ptrs", "--input", data("barriers8.json"), "--d", "-1"}).status == cli::exit_validation);
}

TEST_CASE("commands on the sample inputs") {
  const auto shift = run({"shift", "--input", data("barriers8_two_deltas_keep7.json"), "--kmax", "3.5"});
  REQUIRE(shift.status == 0);
  const auto srows = csv(shift.out);
  REQUIRE(srows.size() == 8);
  CHECK(srows[7][0] == "7");
  CHECK(srows[7][4] == "1");
  CHECK(srows[1][4] == "0");

  const auto field = run({"field", "--input", data("barriers8.json"), "--kmax", "3.5", "--protect", "2"});
  REQUIRE(field.status == 0);
  CHECK(field.out.starts_with("x,re_psi,im_psi,abs_psi,re_dpsi,im_dpsi\n"));

  const auto sweep =
      run({"sweep", "--input", data("barriers8_centers13_keep1.json"), "--kmax", "3.5", "--protect", "1",
           "--epsilon", "0.1", "--points", "12"});
  REQUIRE(sweep.status == 0);
  CHECK(csv(sweep.out).size() == 13);
  CHECK(sweep.err.find("fitted slope") != std::string::npos);

  const auto ep = run({"ep-trace", "--input", data("barriers8_symmetric_heights.json"), "--kmax", "3.5", "--protect",
                       "3,4", "--epsilon", "0.2", "--points", "41"});
  REQUIRE(ep.status == 0);
  CHECK(ep.err.find("coalescence at epsilon = 0.1608") != std::string::npos);

  const auto asym = run({"ep-trace", "--input", data("barriers8_two_deltas_keep7.json"), "--kmax", "3.5",
                         "--protect", "3,4"});
  CHECK(asym.status == cli::exit_validation);

  const auto pairs = run({"pairs", "--input", data("barriers8.json"), "--kmax", "3.5", "--protect", "1",
                          "--positions", "edges:1,3", "--fix", "c1=1.5"});
  REQUIRE(pairs.status == 0);
  int required = 0;
  for (const auto& r : csv(pairs.out)) required += (r[5] == "1") ? 1 : 0;
  CHECK(required == 4);
}
