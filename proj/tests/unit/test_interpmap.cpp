#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsrkit/interpmap.hpp"
#include "tsrkit/synth.hpp"

using namespace tsrkit;

namespace {

std::array<double, 4> values(const InterpPolygon& p) {
  return {p.vertices[0].o, p.vertices[1].o, p.vertices[2].o, p.vertices[3].o};
}

InterpPolygon poly(std::array<Point2, 4> pts, std::array<double, 4> o) {
  InterpPolygon p;
  for (int k = 0; k < 4; ++k) p.vertices[k] = {pts[k].x, pts[k].y, o[k]};
  return p;
}

TableAnnotation one_cell(LogicalLoc loc) {
  TableAnnotation ann = oracle::grid_table(1, 1, 10, 10, 1, 1, 20, 20);
  ann.cells[0].logical = loc;
  return ann;
}

void check_identical(const InterpResult& a, const InterpResult& b) {
  REQUIRE(a.interp.same_shape(b.interp));
  int mismatches = 0;
  for (std::size_t i = 0; i < a.interp.data().size(); ++i) {
    if (a.interp.data()[i] != b.interp.data()[i] || a.mask.data()[i] != b.mask.data()[i]) ++mismatches;
  }
  CHECK(mismatches == 0);
}

}  // namespace

TEST_SUITE("interpmap") {
  TEST_CASE("row and column polygon values") {
    CHECK(values(build_row_polygons(one_cell({0, 0, 0, 0}))[0]) == std::array<double, 4>{0, 0, 1, 1});
    CHECK(values(build_row_polygons(one_cell({1, 2, 0, 3}))[0]) == std::array<double, 4>{1, 1, 3, 3});
    CHECK(values(build_col_polygons(one_cell({0, 0, 0, 0}))[0]) == std::array<double, 4>{0, 1, 1, 0});
    CHECK(values(build_col_polygons(one_cell({1, 2, 0, 3}))[0]) == std::array<double, 4>{0, 4, 4, 0});
    TableAnnotation empty;
    empty.image_width = empty.image_height = 8;
    CHECK(build_row_polygons(empty).empty());

    const TableAnnotation column = oracle::grid_table(4, 1, 10, 5, 0, 0, 12, 22);
    for (const auto& p : build_col_polygons(column)) {
      for (const auto& v : p.vertices) CHECK((v.o == 0.0 || v.o == 1.0));
    }
  }

  TEST_CASE("Delaunay split keeps the 1-3 diagonal on ties") {
    const std::array<Point2, 4> square = {Point2{0, 0}, Point2{4, 0}, Point2{4, 4}, Point2{0, 4}};
    const QuadSplit s = delaunay_quad_split(square);
    CHECK(s[0] == std::array<int, 3>{0, 1, 2});
    CHECK(s[1] == std::array<int, 3>{0, 2, 3});

    // Vertex 4 pulled inside the circumcircle of 1,2,3 flips to the 2-4 diagonal.
    const std::array<Point2, 4> kite = {Point2{0, 0}, Point2{10, 0}, Point2{12, 3}, Point2{1, 2}};
    const QuadSplit f = delaunay_quad_split(kite);
    CHECK(f[0] == std::array<int, 3>{0, 1, 3});
    CHECK(f[1] == std::array<int, 3>{1, 2, 3});
  }

  TEST_CASE("empty polygon list") {
    const InterpResult r = interpolate_polygons({}, 5, 7);
    CHECK(r.interp == RasterMap(5, 7, 1, 0.0));
    CHECK(r.mask == RasterMap(5, 7, 1, 0.0));
  }

  TEST_CASE("full-raster polygon ramps exactly") {
    const std::vector<InterpPolygon> polys = {
        poly({Point2{0, 0}, Point2{99, 0}, Point2{99, 99}, Point2{0, 99}}, {0, 0, 1, 1})};
    const InterpResult r = interpolate_polygons(polys, 100, 100);
    check_identical(r, oracle::interpolate_bruteforce(polys, 100, 100));
    for (int j = 0; j < 100; ++j) {
      for (int i = 0; i < 100; ++i) {
        REQUIRE(r.mask.at(j, i) == 1.0);
        REQUIRE(r.interp.at(j, i) == doctest::Approx(j / 99.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("smaller polygon wins the overlap") {
    const std::vector<InterpPolygon> polys = {
        poly({Point2{0, 0}, Point2{30, 0}, Point2{30, 30}, Point2{0, 30}}, {0, 0, 1, 1}),
        poly({Point2{10, 10}, Point2{20, 10}, Point2{20, 20}, Point2{10, 20}}, {5, 5, 6, 6}),
    };
    const InterpResult r = interpolate_polygons(polys, 32, 32);
    check_identical(r, oracle::interpolate_bruteforce(polys, 32, 32));
    CHECK(r.interp.at(15, 15) == doctest::Approx(5.5));
    CHECK(r.interp.at(5, 5) == doctest::Approx(5.0 / 30.0));
  }

  TEST_CASE("collinear polygons are skipped with a warning") {
    const std::vector<InterpPolygon> polys = {
        poly({Point2{0, 0}, Point2{1, 1}, Point2{2, 2}, Point2{3, 3}}, {0, 0, 1, 1})};
    const InterpResult r = interpolate_polygons(polys, 4, 4);
    CHECK(r.warnings.size() == 1);
    CHECK(r.mask == RasterMap(4, 4, 1, 0.0));
  }

  TEST_CASE("1x1 full-raster table and shared boundary rows") {
    TableAnnotation one = oracle::grid_table(1, 1, 49, 29, 0, 0, 50, 30);
    const InterpMaps m = generate_interp_maps(one);
    CHECK(m.rows.interp.at(0, 10) == 0.0);
    CHECK(m.rows.interp.at(29, 10) == 1.0);
    CHECK(m.cols.interp.at(10, 49) == 1.0);
    CHECK(m.rows.interp.at(14, 3) < m.rows.interp.at(15, 3));
    CHECK(m.rows.mask == m.cols.mask);

    const TableAnnotation grid = oracle::grid_table(2, 2, 99, 99, 0, 0, 200, 200);
    const InterpMaps g = generate_interp_maps(grid);
    for (int i = 0; i <= 198; ++i) REQUIRE(g.rows.interp.at(99, i) == 1.0);
    for (int j = 0; j <= 198; ++j) REQUIRE(g.cols.interp.at(j, 99) == 1.0);
  }

  TEST_CASE("random warped tables match the brute-force replay") {
    for (std::uint64_t seed = 100; seed < 112; ++seed) {
      SynthConfig cfg = harness_config(seed, 96, 96);
      cfg.rows = {1, 4};
      cfg.cols = {1, 4};
      cfg.lattice = 0;
      cfg.min_cell_size = 4;
      const TableAnnotation ann = gen_table(cfg);
      CAPTURE(seed);
      const auto rows = build_row_polygons(ann);
      const auto cols = build_col_polygons(ann);
      check_identical(interpolate_polygons(rows, 96, 96), oracle::interpolate_bruteforce(rows, 96, 96));
      check_identical(interpolate_polygons(cols, 96, 96), oracle::interpolate_bruteforce(cols, 96, 96));
      const InterpMaps m = generate_interp_maps(ann);
      CHECK(m.rows.mask == m.cols.mask);
    }
  }

  TEST_CASE("downsample_map stride rule") {
    RasterMap ramp(8, 8);
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i) ramp.at(j, i) = j * 8 + i;
    const RasterMap d = downsample_map(ramp, 4);
    REQUIRE(d.height() == 2);
    REQUIRE(d.width() == 2);
    CHECK(d.at(0, 0) == 0);
    CHECK(d.at(0, 1) == 4);
    CHECK(d.at(1, 0) == 32);
    CHECK(d.at(1, 1) == 36);
    CHECK(downsample_map(ramp, 1) == ramp);
    const RasterMap c(9, 7, 1, 2.5);
    const RasterMap dc = downsample_map(c, 3);
    CHECK(dc == RasterMap(3, 3, 1, 2.5));
  }
}
