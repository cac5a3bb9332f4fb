#include "common.hpp"

using namespace testing;

TEST_CASE("unit cell basics") {
  const UnitCell c = barrier_cell();
  CHECK(c.period() == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(c.barrier_count() == 1);
  CHECK(c.is_mirror_symmetric());

  const UnitCell flush({{1.0 / 6, 27.0}, {5.0 / 6, 0.0}});
  CHECK_FALSE(flush.is_mirror_symmetric());

  CHECK_THROWS_AS(UnitCell({{0.0, 1.0}}), Error);
  CHECK_THROWS_AS(UnitCell({{1.0, 1.0}}, {{0.7, 1.0}}), Error);  // delta outside the cell

  // Deltas count toward symmetry too.
  CHECK(UnitCell({{1.0, 0.0}}, {{-0.2, 3.0}, {0.2, 3.0}}).is_mirror_symmetric());
  CHECK_FALSE(UnitCell({{1.0, 0.0}}, {{-0.2, 3.0}, {0.2, 2.0}}).is_mirror_symmetric());
}

TEST_CASE("build_periodic") {
  CHECK_THROWS_AS(build_periodic(barrier_cell(), 0), Error);

  const auto spec = barriers8();
  CHECK(spec.total_length() == Catch::Approx(8.0));
  CHECK(spec.barrier_count() == 8);
  CHECK(std::sqrt(spec.cell().segments()[1].height) == Catch::Approx(5.196).margin(1e-3));

  // Cell p sits on [-D/2 + (p-1)d, -D/2 + pd]: its barrier starts 5/12 in.
  const auto lefts = barrier_left_edges(spec);
  REQUIRE(lefts.size() == 8);
  for (int p = 1; p <= 8; ++p) CHECK(lefts[p - 1] == Catch::Approx(-4.0 + (p - 1) + 5.0 / 12).epsilon(1e-14));

  const Profile fp = merged(flatten(build_periodic(free_cell(), 8)));
  REQUIRE(fp.pieces.size() == 1);
  CHECK(fp.pieces[0].length == Catch::Approx(8.0));
  CHECK(fp.pieces[0].height == 0.0);

  for (int n : {1, 2, 5, 8}) {
    CHECK(is_mirror_symmetric(build_periodic(barrier_cell(), n)));
    CHECK_FALSE(is_mirror_symmetric(build_periodic(UnitCell({{1.0 / 6, 27.0}, {5.0 / 6, 0.0}}), n)));
  }
}

TEST_CASE("cell centers and edges") {
  const auto a = cell_centers(barriers8());
  REQUIRE(a.size() == 8);
  for (int p = 0; p < 8; ++p) CHECK(a[p] == Catch::Approx(-3.5 + p));

  CHECK(cell_centers(build_periodic(free_cell(2.0), 1)) == std::vector<double>{0.0});
  CHECK(cell_centers(build_periodic(free_cell(), 2)) == std::vector<double>{-0.5, 0.5});

  const auto b = cell_edges(barriers8());
  REQUIRE(b.size() == 9);
  for (int p = 0; p <= 8; ++p) CHECK(b[p] == Catch::Approx(-4.0 + p));
  CHECK(cell_edges(build_periodic(free_cell(), 1)) == std::vector<double>{-0.5, 0.5});
  CHECK(cell_edges(build_periodic(free_cell(0.5), 4)) == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
}

TEST_CASE("overlay_perturbation") {
  const auto base = barriers8();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(-4.0, 4.0);

  SECTION("epsilon zero leaves the potential untouched") {
    const auto p = overlay_perturbation(base, {{0.3, 5.0}, {-2.2, -1.0}}, symmetric_offsets(), 0.0);
    const Profile a = flatten(base);
    const Profile b = flatten(p);
    for (int i = 0; i < 500; ++i) {
      const double x = ux(rng);
      CHECK(potential_at(a, x) == potential_at(b, x));
    }
    CHECK(b.pieces.size() == a.pieces.size());
  }

  SECTION("empty perturbation at any epsilon") {
    const auto p = overlay_perturbation(base, {}, std::nullopt, 0.37);
    const Profile a = flatten(base);
    const Profile b = flatten(p);
    REQUIRE(a.pieces.size() == b.pieces.size());
    for (std::size_t i = 0; i < a.pieces.size(); ++i) {
      CHECK(a.pieces[i].height == b.pieces[i].height);
      CHECK(a.pieces[i].delta_after == b.pieces[i].delta_after);
    }
  }

  SECTION("height offsets scale with epsilon") {
    const auto p = overlay_perturbation(base, {}, symmetric_offsets(), 0.1);
    const Profile prof = flatten(p);
    const auto lefts = barrier_left_edges(p);
    for (int b = 0; b < 8; ++b) {
      CHECK(potential_at(prof, lefts[b] + 1.0 / 12) == Catch::Approx(27.0 + 0.1 * symmetric_offsets()[b]));
    }
    CHECK(is_mirror_symmetric(p));
    CHECK(p.epsilon() == 0.1);
    CHECK(p.with_epsilon(0.0).epsilon() == 0.0);
    CHECK_THROWS_AS(p.with_epsilon(-0.1), Error);
  }

  SECTION("validation") {
    CHECK_THROWS_AS(overlay_perturbation(base, {{4.5, 1.0}}, std::nullopt, 0.1), Error);
    CHECK_THROWS_AS(overlay_perturbation(base, {}, std::vector<double>{1.0, 2.0}, 0.1), Error);
    // Endpoints are inside.
    CHECK_NOTHROW(overlay_perturbation(base, {{-4.0, 1.0}, {4.0, 1.0}}, std::nullopt, 0.1));
  }

  SECTION("a scatterer on a junction is one jump, not two") {
    const double x = barrier_left_edges(base)[2];
    const auto p = overlay_perturbation(base, {{x, 2.0}}, std::nullopt, 0.5);
    const Profile prof = flatten(p);
    int hits = 0;
    double total = 0.0;
    for (std::size_t j = 0; j <= prof.pieces.size(); ++j) {
      if (prof.junction_delta(j) != 0.0) {
        ++hits;
        total += prof.junction_delta(j);
      }
    }
    CHECK(hits == 1);
    CHECK(total == Catch::Approx(1.0));
    CHECK(prof.pieces.size() == flatten(base).pieces.size());
  }
}

TEST_CASE("slicing a cell out of a periodic structure gives the cell back") {
  const UnitCell with_deltas({{0.3, 2.0}, {0.4, -1.5}, {0.3, 2.0}}, {{0.0, 1.25}, {-0.5, 0.5}, {0.5, 0.5}});
  for (const UnitCell& c : {barrier_cell(), with_deltas}) {
    const auto spec = build_periodic(c, 5);
    for (int p = 1; p <= 5; ++p) {
      const UnitCell s = slice_cell(spec, p);
      REQUIRE(s.segments().size() == c.segments().size());
      for (std::size_t i = 0; i < s.segments().size(); ++i) {
        CHECK(s.segments()[i].length == Catch::Approx(c.segments()[i].length).epsilon(1e-12));
        CHECK(s.segments()[i].height == c.segments()[i].height);
      }
      REQUIRE(s.deltas().size() == c.deltas().size());
      for (std::size_t i = 0; i < s.deltas().size(); ++i) {
        CHECK(s.deltas()[i].position == Catch::Approx(c.deltas()[i].position).margin(1e-12));
        CHECK(s.deltas()[i].strength == c.deltas()[i].strength);
      }
    }
  }
}
