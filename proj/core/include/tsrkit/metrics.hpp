#pragma once

#include <compare>
#include <vector>

#include "tsrkit/geometry.hpp"

namespace tsrkit {

struct MatchPair {
  int gt = -1;
  int pred = -1;
  double iou = 0.0;
};

struct CellMatching {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;

  /// pred index -> gt index, -1 when unmatched.
  std::vector<int> pred_to_gt(int pred_count) const;
};

/// Greedy one-to-one matching in descending IoU order among pairs with
/// IoU >= threshold; ties by (gt, pred) index. Concave quads score IoU 0.
CellMatching match_cells(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Raw counts so corpora can be micro-averaged.
struct MatchCounts {
  long long true_positive = 0;
  long long predicted = 0;
  long long ground_truth = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    true_positive += o.true_positive;
    predicted += o.predicted;
    ground_truth += o.ground_truth;
    return *this;
  }
};

/// Empty denominators give 0, except that an empty prediction of an empty
/// ground truth is a perfect score.
PRF prf_from_counts(const MatchCounts& counts);

MatchCounts physical_counts(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold);
PRF physical_prf(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold);

struct LogicalAccuracy {
  double acc = 1.0;
  double row_start = 1.0;
  double row_end = 1.0;
  double col_start = 1.0;
  double col_end = 1.0;
  bool empty_table = false;
};

LogicalAccuracy logical_accuracy(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold);
LogicalAccuracy logical_accuracy(const TableAnnotation& gt, const TableAnnotation& pred,
                                 const CellMatching& matching);

enum class AdjacencyDirection { Horizontal, Vertical };

/// Directed neighbor pair: `to` starts right after `from` ends along the
/// direction, and their ranges on the other axis intersect.
struct AdjacencyRelation {
  int from = -1;
  int to = -1;
  AdjacencyDirection direction = AdjacencyDirection::Horizontal;

  friend auto operator<=>(const AdjacencyRelation&, const AdjacencyRelation&) = default;
};

/// Sorted, keyed by cell index.
std::vector<AdjacencyRelation> adjacency_relations(const TableAnnotation& ann);

MatchCounts adjacency_counts(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold);
MatchCounts adjacency_counts(const TableAnnotation& gt, const TableAnnotation& pred, const CellMatching& matching);
PRF adjacency_prf(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold);

/// Weighted harmonic mean of physical F1 and logical accuracy.
double f_beta(double f1_physical, double logical_acc, double beta = 0.5);

}  // namespace tsrkit
