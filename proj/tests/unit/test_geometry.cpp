#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "refugia/error.hpp"
#include "refugia/geometry.hpp"

using namespace refugia;

namespace {

// Cells whose center lies in [x0, x0 + w) x [y0, y0 + w).
int cells_in_square(const RefugeMask& m, double x0, double y0, double w) {
  int count = 0;
  const Grid& g = m.grid;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x_center(i);
      const double y = g.y_center(j);
      if (x >= x0 && x < x0 + w && y >= y0 && y < y0 + w) {
        count += m.values[g.index(i, j)] == 1.0;
      }
    }
  }
  return count;
}

double perimeter_bound(const Grid& g, int n, double area) {
  const double side = std::sqrt(area) / n;
  return n * n * 4.0 * side * std::max(g.dx, g.dy);
}

}  // namespace

TEST_CASE("grid arithmetic") {
  const Grid g = build_grid(2, 2, 1.0, 1.0);
  CHECK(g.dx == 0.5);
  CHECK(g.dy == 0.5);
  const Grid h = build_grid(3, 5, 6.0, 10.0);
  CHECK(h.dx == 2.0);
  CHECK(h.dy == 2.0);
  CHECK(h.x_center(0) == 1.0);
  CHECK(h.size() == 15);
  CHECK(h.index(2, 4) == 14);
  CHECK(h.area() == doctest::Approx(60.0));
  CHECK(h.cell_area() * h.size() == doctest::Approx(h.area()));
}

TEST_CASE("grid rejects degenerate input") {
  CHECK_THROWS_AS(build_grid(1, 4, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(4, 4, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(4, 4, 1.0, -2.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(4, 4, NAN, 1.0), InvalidArgument);
}

TEST_CASE("frequency one gives a single corner square") {
  const Grid g = build_grid(80, 80, 300.0, 300.0);
  const RefugeMask m = refuge_frequency_mask(g, 1, 3600.0);
  CHECK(m.is_indicator());
  CHECK(cells_in_square(m, 0.0, 0.0, 60.0) == 16 * 16);
  CHECK(mask_area(m) == doctest::Approx(3600.0).epsilon(1e-12));
}

TEST_CASE("frequency two gives four squares at the lattice corners") {
  const Grid g = build_grid(80, 80, 300.0, 300.0);
  const RefugeMask m = refuge_frequency_mask(g, 2, 3600.0);
  for (double x0 : {0.0, 150.0}) {
    for (double y0 : {0.0, 150.0}) CHECK(cells_in_square(m, x0, y0, 30.0) == 64);
  }
  CHECK(mask_area(m) == doctest::Approx(3600.0).epsilon(1e-12));
}

TEST_CASE("aligned refuge families have exact area") {
  const Grid fine = build_grid(80, 80, 300.0, 300.0);
  for (int n : {1, 2, 4, 8, 16}) {
    CHECK(mask_area(refuge_frequency_mask(fine, n, 3600.0)) ==
          doctest::Approx(3600.0).epsilon(1e-12));
  }
  // Square edges fall on cell centers here; each square still covers
  // side/dx cells per axis.
  const Grid desk = build_grid(40, 40, 300.0, 300.0);
  for (int n : {1, 2, 4, 8, 16}) {
    CHECK(mask_area(refuge_frequency_mask(desk, n, 14400.0)) ==
          doctest::Approx(14400.0).epsilon(1e-12));
  }
}

TEST_CASE("unaligned refuge areas stay within the perimeter bound") {
  const Grid g = build_grid(37, 37, 300.0, 300.0);
  for (int n : {1, 2, 3, 5}) {
    const double area = 5000.0;
    const double got = mask_area(refuge_frequency_mask(g, n, area));
    CHECK(std::abs(got - area) <= perimeter_bound(g, n, area));
  }
}

TEST_CASE("frequency mask preconditions") {
  const Grid g = build_grid(40, 40, 300.0, 300.0);
  CHECK_THROWS_AS(refuge_frequency_mask(g, 16, 3600.0), InvalidArgument);
  CHECK_THROWS_AS(refuge_frequency_mask(g, 0, 3600.0), InvalidArgument);
  CHECK_THROWS_AS(refuge_frequency_mask(g, 1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(refuge_frequency_mask(g, 1, 300.0 * 300.0 * 1.01), InvalidArgument);
  const Grid rect = build_grid(40, 20, 300.0, 150.0);
  CHECK_THROWS_AS(refuge_frequency_mask(rect, 1, 100.0), InvalidArgument);
  try {
    refuge_frequency_mask(g, 16, 3600.0);
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("unresolvable") != std::string::npos);
  }
}

TEST_CASE("full-domain refuge covers everything") {
  const Grid g = build_grid(10, 10, 50.0, 50.0);
  const RefugeMask m = refuge_frequency_mask(g, 1, 2500.0);
  CHECK(mask_area(m) == doctest::Approx(2500.0));
}

TEST_CASE("uniform masks") {
  const Grid g = build_grid(8, 8, 300.0, 300.0);
  CHECK(mask_area(refuge_uniform_mask(g, 0.0)) == 0.0);
  CHECK(mask_area(refuge_uniform_mask(g, 1.0)) == doctest::Approx(90000.0));
  const RefugeMask q = refuge_uniform_mask(g, 0.25);
  CHECK(mask_area(q) == doctest::Approx(0.25 * 90000.0));
  CHECK_FALSE(q.is_indicator());
  CHECK_THROWS_AS(refuge_uniform_mask(g, -0.1), InvalidArgument);
  CHECK_THROWS_AS(refuge_uniform_mask(g, 1.5), InvalidArgument);
}

TEST_CASE("patch fields") {
  const Grid g = build_grid(10, 10, 10.0, 10.0);
  PatchSpec spec;
  spec.rectangles = {{0, 0, 4, 4, 2.0}, {2, 2, 4, 4, 3.0}};
  const Field f = patches_field(g, spec);
  CHECK(f[g.index(0, 0)] == 2.0);
  CHECK(f[g.index(2, 2)] == 3.0);  // last listed wins
  CHECK(f[g.index(5, 5)] == 3.0);
  CHECK(f[g.index(9, 9)] == 0.0);

  SUBCASE("additive over disjoint rectangles") {
    PatchSpec a{{{0, 0, 3, 3, 1.0}}};
    PatchSpec b{{{5, 5, 3, 2, 4.0}}};
    PatchSpec both{{a.rectangles[0], b.rectangles[0]}};
    const Field fa = patches_field(g, a);
    const Field fb = patches_field(g, b);
    const Field fab = patches_field(g, both);
    for (std::size_t c = 0; c < fab.size(); ++c) CHECK(fab[c] == fa[c] + fb[c]);
  }
  SUBCASE("rectangles escaping the domain are rejected") {
    PatchSpec bad{{{8, 8, 4, 1, 1.0}}};
    CHECK_THROWS_AS(patches_field(g, bad), InvalidArgument);
    PatchSpec neg{{{1, 1, 1, 1, -1.0}}};
    CHECK_THROWS_AS(validate_patch_spec(g, neg), InvalidArgument);
  }
}

TEST_CASE("patch spec text round trip") {
  std::istringstream in("# layout\n1 2 3 4 0.5\n\n  10 20 30 40 1  # trailing\n");
  const PatchSpec spec = parse_patch_spec(in);
  REQUIRE(spec.rectangles.size() == 2);
  CHECK(spec.rectangles[1].y0 == 20.0);
  CHECK(spec.rectangles[1].density == 1.0);
  std::ostringstream out;
  write_patch_spec(out, spec);
  std::istringstream back(out.str());
  const PatchSpec again = parse_patch_spec(back);
  REQUIRE(again.rectangles.size() == 2);
  CHECK(again.rectangles[0].x0 == 1.0);
  CHECK(again.rectangles[0].density == 0.5);

  std::istringstream short_line("1 2 3\n");
  CHECK_THROWS(parse_patch_spec(short_line));
  std::istringstream junk("1 2 3 4 x\n");
  CHECK_THROWS(parse_patch_spec(junk));
  CHECK_THROWS(load_patch_spec("/nonexistent/layout.txt"));
}

TEST_CASE("centered patch matches the frequency-one refuge") {
  const Grid g = build_grid(40, 40, 300.0, 300.0);
  const Field patch = patches_field(g, centered_patch(14400.0));
  const RefugeMask refuge = refuge_frequency_mask(g, 1, 14400.0);
  // Same square, but the patch uses closed edges; interiors agree.
  CHECK(integrate(g, patch) >= mask_area(refuge));
  for (std::size_t c = 0; c < patch.size(); ++c) {
    if (refuge.values[c] == 1.0) CHECK(patch[c] == 1.0);
  }
}
