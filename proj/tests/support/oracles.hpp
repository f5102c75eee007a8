#pragma once

// Slow, independent reference implementations used as test oracles.

#include <vector>

#include "tsrkit/geometry.hpp"
#include "tsrkit/interpmap.hpp"
#include "tsrkit/metrics.hpp"
#include "tsrkit/synth.hpp"
#include "tsrkit/teds.hpp"

namespace oracle {

struct Merge {
  int row = 0;
  int col = 0;
  int row_span = 1;
  int col_span = 1;
};

/// Axis-aligned grid with uniform cell size, row-major cells; merged blocks
/// replace their unit cells.
tsrkit::TableAnnotation grid_table(int rows, int cols, double cell_w, double cell_h, double x0 = 0.0,
                                   double y0 = 0.0, int image_w = 0, int image_h = 0,
                                   const std::vector<Merge>& merges = {});

/// Grid lines at explicit coordinates.
tsrkit::TableAnnotation grid_from_lines(const std::vector<double>& xs, const std::vector<double>& ys, int image_w,
                                        int image_h, const std::vector<Merge>& merges = {});

/// 2x2 grid whose top row is one 1x2 cell.
tsrkit::TableAnnotation two_by_two_top_merged();

/// Small random table: at most max_axis rows and columns on a size x size
/// image, warped like the round-trip harness, no lattice snapping.
tsrkit::SynthConfig small_table_config(std::uint64_t seed, int size, int max_axis);

/// Per-pixel replay of the polygon interpolation: every polygon scans its
/// whole floor/ceil box, picks its diagonal from an explicit circumcircle,
/// tests triangle 1 then triangle 2, smallest polygon first.
tsrkit::InterpResult interpolate_bruteforce(const std::vector<tsrkit::InterpPolygon>& polys, int height, int width);

/// Every ordered pair checked directly.
std::vector<tsrkit::AdjacencyRelation> adjacency_pairs(const tsrkit::TableAnnotation& ann);

/// Minimum-cost Tai mapping by exhaustive search; exponential, keep trees tiny.
int tree_edit_distance_exhaustive(const tsrkit::StructureTree& a, const tsrkit::StructureTree& b);

/// Valid table/tr/td tree with at most max_nodes nodes.
tsrkit::StructureTree random_tree(tsrkit::Rng& rng, int max_nodes);

}  // namespace oracle
