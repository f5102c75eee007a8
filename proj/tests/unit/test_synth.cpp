#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "tsrkit/error.hpp"
#include "tsrkit/metrics.hpp"
#include "tsrkit/synth.hpp"

using namespace tsrkit;

namespace {

// Every (row, col) index pair is covered by exactly one cell.
bool tiles_grid(const TableAnnotation& ann) {
  int rows = 0, cols = 0;
  long long area = 0;
  for (const auto& c : ann.cells) {
    rows = std::max(rows, c.logical.row_end + 1);
    cols = std::max(cols, c.logical.col_end + 1);
    area += static_cast<long long>(c.logical.row_span()) * c.logical.col_span();
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& c : ann.cells)
    for (int r = c.logical.row_start; r <= c.logical.row_end; ++r)
      for (int k = c.logical.col_start; k <= c.logical.col_end; ++k) seen.insert({r, k});
  return area == static_cast<long long>(rows) * cols && static_cast<long long>(seen.size()) == area;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("generator stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng u(1);
    for (int i = 0; i < 1000; ++i) {
      const double v = u.uniform();
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
      const int k = u.uniform_int(-3, 3);
      CHECK(k >= -3);
      CHECK(k <= 3);
    }
    Rng parent(9);
    Rng child = parent.split();
    CHECK(child.next() != parent.next());
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
  }

  TEST_CASE("determinism and validity") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const SynthConfig cfg = harness_config(seed);
      const TableAnnotation a = gen_table(cfg);
      CAPTURE(seed);
      CHECK(a == gen_table(cfg));
      CHECK(validate_annotation(a).empty());
      CHECK(tiles_grid(a));
    }
  }

  TEST_CASE("merge probability 0 gives unit cells") {
    SynthConfig cfg;
    cfg.merge_probability = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      for (const auto& c : gen_table(cfg).cells) {
        CHECK(c.logical.row_span() == 1);
        CHECK(c.logical.col_span() == 1);
      }
    }
  }

  TEST_CASE("single-cell tables") {
    SynthConfig cfg;
    cfg.rows = cfg.cols = {1, 1};
    cfg.seed = 5;
    const TableAnnotation t = gen_table(cfg);
    REQUIRE(t.cells.size() == 1);
    CHECK(t.cells[0].logical == LogicalLoc{0, 0, 0, 0});
  }

  TEST_CASE("infeasible geometry is an input error") {
    SynthConfig cfg;
    cfg.rows = {200, 200};
    cfg.height = 256;
    CHECK_THROWS_AS(gen_table(cfg), TsrError);
    SynthConfig bad;
    bad.rows = {3, 2};
    CHECK_THROWS_AS(check_synth_config(bad), TsrError);
    CHECK(parse_warp_kind("homography") == WarpKind::Homography);
    CHECK_THROWS_AS(parse_warp_kind("twirl"), TsrError);
  }

  TEST_CASE("homographies") {
    const TableAnnotation ann = gen_table(harness_config(2, 400, 400));
    CHECK(warp_annotation(ann, kIdentityHomography) == ann);

    const Homography shift = {1, 0, 3, 0, 1, -2, 0, 0, 1};
    const TableAnnotation moved = warp_annotation(ann, shift);
    for (std::size_t i = 0; i < ann.cells.size(); ++i)
      for (int k = 0; k < 4; ++k) CHECK(moved.cells[i].quad[k] == ann.cells[i].quad[k] + Point2{3, -2});

    const std::array<Point2, 4> src = {Point2{0, 0}, Point2{10, 0}, Point2{10, 10}, Point2{0, 10}};
    const std::array<Point2, 4> dst = {Point2{1, 2}, Point2{12, 1}, Point2{11, 13}, Point2{0, 9}};
    const Homography h = homography_from_points(src, dst);
    for (int k = 0; k < 4; ++k) {
      const Point2 p = apply_homography(h, src[k]);
      CHECK(p.x == doctest::Approx(dst[k].x).epsilon(1e-12));
      CHECK(p.y == doctest::Approx(dst[k].y).epsilon(1e-12));
    }

    const Homography escape = {1, 0, 1000, 0, 1, 0, 0, 0, 1};
    CHECK_THROWS_AS(warp_annotation(ann, escape), TsrError);
  }

  TEST_CASE("warps preserve adjacency") {
    for (std::uint64_t seed = 0; seed < 20; seed += 4) {
      SynthConfig plain = harness_config(seed);
      plain.warp = WarpKind::None;
      const TableAnnotation a = gen_table(plain);
      const TableAnnotation w = gen_table(harness_config(seed));
      CHECK(adjacency_relations(a) == adjacency_relations(w));
    }
  }
}
