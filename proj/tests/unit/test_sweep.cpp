#include "common.hpp"

using namespace testing;

namespace {

std::vector<double> geometric(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return g;
}

std::vector<double> linear(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
  return g;
}

StructureSpec centers13_keep1() {
  const auto spec = barriers8();
  const auto x = resolve_positions(spec, {Placement::centers, {1, 3}, {}});
  const auto d = design_strengths(spec, barrier_ptrs(), {x, {{0, 12.0}}, {1}});
  return overlay_perturbation(spec, as_perturbation(x, d.strengths).deltas, std::nullopt, 0.0);
}

}  // namespace

TEST_CASE("log-log slope fit") {
  std::vector<double> e = geometric(1e-3, 1e-1, 9);
  std::vector<double> r4, r2;
  for (double x : e) {
    r4.push_back(3.0 * std::pow(x, 4));
    r2.push_back(0.5 * x * x);
  }
  CHECK(fit_loglog_slope(e, r4) == Catch::Approx(4.0).epsilon(1e-10));
  CHECK(fit_loglog_slope(e, r2) == Catch::Approx(2.0).epsilon(1e-10));
  // Points outside (1e-12, 0.1) are ignored; too few left gives NaN.
  CHECK(std::isnan(fit_loglog_slope({1e-3, 1e-2}, {1e-20, 0.5})));
  CHECK(std::isnan(fit_loglog_slope({}, {})));
}

TEST_CASE("sweep grid validation") {
  const auto spec = centers13_keep1();
  const auto& p = barrier_ptrs()[0];
  CHECK_THROWS_AS(epsilon_sweep(spec, p, {0.01, 0.01}, 0.05), Error);
  CHECK_THROWS_AS(epsilon_sweep(spec, p, {0.0, 0.01}, 0.05), Error);
  CHECK_THROWS_AS(epsilon_sweep(spec, p, {0.02, 0.01}, 0.05), Error);
}

TEST_CASE("protected resonances lose transmission at fourth order") {
  const auto spec = centers13_keep1();
  const auto grid = geometric(0.01, 0.1, 12);
  auto slope = [&](int n) {
    const auto sw = epsilon_sweep(spec, ptr_by_number(barrier_ptrs(), n), grid,
                                  resonance_half_spacing(barrier_ptrs(), n));
    REQUIRE_FALSE(sw.lost_after.has_value());
    REQUIRE(sw.epsilons.size() == grid.size());
    return sw.fitted_slope;
  };
  CHECK(std::abs(slope(1) - 4.0) < 0.25);
  CHECK(std::abs(slope(7) - 4.0) < 0.25);
  CHECK(std::abs(slope(2) - 2.0) < 0.25);
  CHECK(std::abs(slope(3) - 2.0) < 0.25);
}

TEST_CASE("symmetric height offsets keep T = 1 until two resonances meet") {
  const auto spec = overlay_perturbation(barriers8(), {}, symmetric_offsets(), 0.0);
  const auto grid = linear(0.00375, 0.15, 40);
  for (const auto& p : barrier_ptrs()) {
    const auto sw = epsilon_sweep(spec, p, grid, resonance_half_spacing(barrier_ptrs(), p.n));
    REQUIRE_FALSE(sw.lost_after.has_value());
    for (double r : sw.one_minus_T) CHECK(r < 1e-14);
    // Continuity: no jump to a neighbouring resonance.
    double k_prev = p.k;
    for (double k : sw.peak_k) {
      CHECK(std::abs(k - k_prev) < 0.5 * resonance_half_spacing(barrier_ptrs(), p.n));
      k_prev = k;
    }
  }
}

TEST_CASE("large perturbation: the tracked peak keeps high transmission") {
  const auto spec = centers13_keep1();
  const auto sw = epsilon_sweep(spec, barrier_ptrs()[0], linear(0.005625, 0.225, 40),
                                resonance_half_spacing(barrier_ptrs(), 1));
  REQUIRE_FALSE(sw.lost_after.has_value());
  CHECK(sw.epsilons.back() == Catch::Approx(0.225));
  CHECK(sw.peak_k.back() == Catch::Approx(1.866958).margin(1e-5));
  CHECK(sw.peak_T.back() == Catch::Approx(0.89978).margin(1e-4));
}

TEST_CASE("the peak is reported lost when it leaves the window") {
  const auto spec = overlay_perturbation(barriers8(), {{0.2, 400.0}}, std::nullopt, 0.0);
  const auto sw = epsilon_sweep(spec, barrier_ptrs()[3], geometric(0.01, 1.0, 10), 0.01);
  CHECK(sw.lost_after.has_value());
  CHECK(sw.epsilons.size() < 10);
}
