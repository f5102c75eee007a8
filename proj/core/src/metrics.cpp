#include "tsrkit/metrics.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "tsrkit/error.hpp"

namespace tsrkit {

namespace {

struct Box {
  double x0, y0, x1, y1;
};

Box bbox(const Quad& q) {
  Box b{q[0].x, q[0].y, q[0].x, q[0].y};
  for (int k = 1; k < 4; ++k) {
    b.x0 = std::min(b.x0, q[k].x);
    b.y0 = std::min(b.y0, q[k].y);
    b.x1 = std::max(b.x1, q[k].x);
    b.y1 = std::max(b.y1, q[k].y);
  }
  return b;
}

bool boxes_touch(const Box& a, const Box& b) {
  return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

double safe_iou(const Quad& a, bool a_convex, const Quad& b, bool b_convex) {
  if (!a_convex || !b_convex) return 0.0;
  return polygon_iou(a, b);
}

double ratio(long long num, long long den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

}  // namespace

std::vector<int> CellMatching::pred_to_gt(int pred_count) const {
  std::vector<int> map(pred_count, -1);
  for (const auto& p : pairs) map.at(p.pred) = p.gt;
  return map;
}

CellMatching match_cells(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw_invalid("match_cells: threshold must be in (0,1]");
  const int ng = static_cast<int>(gt.cells.size());
  const int np = static_cast<int>(pred.cells.size());
  std::vector<Box> gb(ng), pb(np);
  std::vector<char> gc(ng), pc(np);
  for (int i = 0; i < ng; ++i) {
    gb[i] = bbox(gt.cells[i].quad);
    gc[i] = is_convex(gt.cells[i].quad);
  }
  for (int j = 0; j < np; ++j) {
    pb[j] = bbox(pred.cells[j].quad);
    pc[j] = is_convex(pred.cells[j].quad);
  }

  std::vector<MatchPair> candidates;
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < np; ++j) {
      if (!boxes_touch(gb[i], pb[j])) continue;
      const double iou = safe_iou(gt.cells[i].quad, gc[i], pred.cells[j].quad, pc[j]);
      if (iou >= iou_threshold) candidates.push_back({i, j, iou});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.pred < b.pred;
  });

  CellMatching out;
  std::vector<char> gt_used(ng, 0), pred_used(np, 0);
  for (const auto& c : candidates) {
    if (gt_used[c.gt] || pred_used[c.pred]) continue;
    gt_used[c.gt] = pred_used[c.pred] = 1;
    out.pairs.push_back(c);
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const MatchPair& a, const MatchPair& b) { return a.gt < b.gt; });
  for (int i = 0; i < ng; ++i)
    if (!gt_used[i]) out.unmatched_gt.push_back(i);
  for (int j = 0; j < np; ++j)
    if (!pred_used[j]) out.unmatched_pred.push_back(j);
  return out;
}

PRF prf_from_counts(const MatchCounts& c) {
  if (c.predicted == 0 && c.ground_truth == 0) return {1.0, 1.0, 1.0};
  PRF out;
  out.precision = ratio(c.true_positive, c.predicted);
  out.recall = ratio(c.true_positive, c.ground_truth);
  const double s = out.precision + out.recall;
  out.f1 = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

MatchCounts physical_counts(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold) {
  const CellMatching m = match_cells(gt, pred, iou_threshold);
  return {static_cast<long long>(m.pairs.size()), static_cast<long long>(pred.cells.size()),
          static_cast<long long>(gt.cells.size())};
}

PRF physical_prf(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold) {
  return prf_from_counts(physical_counts(gt, pred, iou_threshold));
}

LogicalAccuracy logical_accuracy(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold) {
  return logical_accuracy(gt, pred, match_cells(gt, pred, iou_threshold));
}

LogicalAccuracy logical_accuracy(const TableAnnotation& gt, const TableAnnotation& pred,
                                 const CellMatching& matching) {
  LogicalAccuracy out;
  const auto n = static_cast<long long>(gt.cells.size());
  if (n == 0) {
    out.empty_table = true;
    return out;
  }
  std::array<long long, 5> hits{};
  for (const auto& p : matching.pairs) {
    const LogicalLoc& g = gt.cells.at(p.gt).logical;
    const LogicalLoc& q = pred.cells.at(p.pred).logical;
    const bool rs = g.row_start == q.row_start;
    const bool re = g.row_end == q.row_end;
    const bool cs = g.col_start == q.col_start;
    const bool ce = g.col_end == q.col_end;
    hits[0] += rs && re && cs && ce;
    hits[1] += rs;
    hits[2] += re;
    hits[3] += cs;
    hits[4] += ce;
  }
  out.acc = ratio(hits[0], n);
  out.row_start = ratio(hits[1], n);
  out.row_end = ratio(hits[2], n);
  out.col_start = ratio(hits[3], n);
  out.col_end = ratio(hits[4], n);
  return out;
}

std::vector<AdjacencyRelation> adjacency_relations(const TableAnnotation& ann) {
  // Bucket cells by where they start so each cell only meets candidates that
  // begin right after it ends.
  std::map<int, std::vector<int>> by_col_start;
  std::map<int, std::vector<int>> by_row_start;
  for (int i = 0; i < static_cast<int>(ann.cells.size()); ++i) {
    by_col_start[ann.cells[i].logical.col_start].push_back(i);
    by_row_start[ann.cells[i].logical.row_start].push_back(i);
  }
  std::vector<AdjacencyRelation> out;
  for (int a = 0; a < static_cast<int>(ann.cells.size()); ++a) {
    const LogicalLoc& la = ann.cells[a].logical;
    if (auto it = by_col_start.find(la.col_end + 1); it != by_col_start.end()) {
      for (int b : it->second) {
        const LogicalLoc& lb = ann.cells[b].logical;
        if (lb.row_start <= la.row_end && la.row_start <= lb.row_end)
          out.push_back({a, b, AdjacencyDirection::Horizontal});
      }
    }
    if (auto it = by_row_start.find(la.row_end + 1); it != by_row_start.end()) {
      for (int b : it->second) {
        const LogicalLoc& lb = ann.cells[b].logical;
        if (lb.col_start <= la.col_end && la.col_start <= lb.col_end)
          out.push_back({a, b, AdjacencyDirection::Vertical});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

MatchCounts adjacency_counts(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold) {
  return adjacency_counts(gt, pred, match_cells(gt, pred, iou_threshold));
}

MatchCounts adjacency_counts(const TableAnnotation& gt, const TableAnnotation& pred, const CellMatching& matching) {
  const auto gt_rel = adjacency_relations(gt);
  const auto pred_rel = adjacency_relations(pred);
  const std::vector<int> to_gt = matching.pred_to_gt(static_cast<int>(pred.cells.size()));
  MatchCounts counts;
  counts.ground_truth = static_cast<long long>(gt_rel.size());
  counts.predicted = static_cast<long long>(pred_rel.size());
  for (const auto& r : pred_rel) {
    const int a = to_gt[r.from];
    const int b = to_gt[r.to];
    if (a < 0 || b < 0) continue;
    if (std::binary_search(gt_rel.begin(), gt_rel.end(), AdjacencyRelation{a, b, r.direction})) ++counts.true_positive;
  }
  return counts;
}

PRF adjacency_prf(const TableAnnotation& gt, const TableAnnotation& pred, double iou_threshold) {
  return prf_from_counts(adjacency_counts(gt, pred, iou_threshold));
}

double f_beta(double f1_physical, double logical_acc, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * f1_physical + logical_acc;
  if (den == 0.0) return 0.0;
  return (1.0 + b2) * f1_physical * logical_acc / den;
}

}  // namespace tsrkit
