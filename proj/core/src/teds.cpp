#include "tsrkit/teds.hpp"

#include <algorithm>
#include <functional>

#include "tsrkit/error.hpp"

namespace tsrkit {

int StructureTree::add(TreeLabel label, int parent, int rowspan, int colspan) {
  nodes.push_back({label, rowspan, colspan, {}});
  const int id = size() - 1;
  if (parent >= 0) nodes.at(parent).children.push_back(id);
  return id;
}

std::string StructureTree::to_string() const {
  if (nodes.empty()) return "";
  std::function<void(int, std::string&)> emit = [&](int id, std::string& out) {
    const TreeNode& n = nodes[id];
    out += n.label == TreeLabel::Table ? "table" : n.label == TreeLabel::Tr ? "tr" : "td";
    if (n.rowspan != 1 || n.colspan != 1) {
      out += "[";
      if (n.rowspan != 1) out += "rowspan=" + std::to_string(n.rowspan);
      if (n.rowspan != 1 && n.colspan != 1) out += ",";
      if (n.colspan != 1) out += "colspan=" + std::to_string(n.colspan);
      out += "]";
    }
    if (n.children.empty()) return;
    out += "(";
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) out += ",";
      emit(n.children[i], out);
    }
    out += ")";
  };
  std::string s;
  emit(0, s);
  return s;
}

StructureTree to_structure_tree(const TableAnnotation& ann) {
  const auto& cells = ann.cells;
  std::vector<int> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& la = cells[a].logical;
    const auto& lb = cells[b].logical;
    if (la.row_start != lb.row_start) return la.row_start < lb.row_start;
    if (la.col_start != lb.col_start) return la.col_start < lb.col_start;
    return a < b;
  });

  // Overlap check: sweep by row_start, keep cells whose rows are still open.
  std::vector<int> open;
  for (int idx : order) {
    const auto& l = cells[idx].logical;
    if (l.row_start < 0 || l.col_start < 0 || l.row_end < l.row_start || l.col_end < l.col_start)
      throw_invalid("to_structure_tree: cell " + std::to_string(idx) + " has an invalid logical range");
    std::erase_if(open, [&](int o) { return cells[o].logical.row_end < l.row_start; });
    for (int o : open)
      if (logical_overlap(cells[o].logical, l))
        throw_invalid("to_structure_tree: cells " + std::to_string(o) + " and " + std::to_string(idx) +
                      " overlap logically");
    open.push_back(idx);
  }

  int rows = 0;
  for (const auto& c : cells) rows = std::max(rows, c.logical.row_end + 1);
  StructureTree tree;
  tree.add(TreeLabel::Table);
  std::vector<int> tr(rows);
  for (int r = 0; r < rows; ++r) tr[r] = tree.add(TreeLabel::Tr, 0);
  for (int idx : order) {
    const auto& l = cells[idx].logical;
    tree.add(TreeLabel::Td, tr[l.row_start], l.row_span(), l.col_span());
  }
  return tree;
}

namespace {

// Postorder view used by the keyroot dynamic program (1-based indices).
struct Postorder {
  std::vector<int> node;      // postorder position -> node id
  std::vector<int> leftmost;  // postorder position -> leftmost leaf position
  std::vector<int> keyroots;

  explicit Postorder(const StructureTree& t) {
    const int n = t.size();
    node.assign(n + 1, -1);
    leftmost.assign(n + 1, 0);
    int counter = 0;
    std::function<int(int)> visit = [&](int id) {
      int first_leaf = -1;
      for (int c : t.nodes[id].children) {
        const int lm = visit(c);
        if (first_leaf < 0) first_leaf = lm;
      }
      const int pos = ++counter;
      node[pos] = id;
      leftmost[pos] = first_leaf < 0 ? pos : first_leaf;
      return leftmost[pos];
    };
    if (n > 0) visit(0);
    // A keyroot is the highest node for its leftmost leaf.
    std::vector<int> highest(n + 1, 0);
    for (int i = 1; i <= n; ++i) highest[leftmost[i]] = i;
    for (int i = 1; i <= n; ++i)
      if (highest[leftmost[i]] == i) keyroots.push_back(i);
  }
};

}  // namespace

int tree_edit_distance(const StructureTree& a, const StructureTree& b) {
  const int n = a.size();
  const int m = b.size();
  if (n == 0 || m == 0) return n + m;
  const Postorder pa(a);
  const Postorder pb(b);
  std::vector<std::vector<int>> td(n + 1, std::vector<int>(m + 1, 0));
  std::vector<std::vector<int>> fd(n + 2, std::vector<int>(m + 2, 0));

  for (int i : pa.keyroots) {
    for (int j : pb.keyroots) {
      const int li = pa.leftmost[i];
      const int lj = pb.leftmost[j];
      // fd indices are offset so that li-1 maps to 0.
      auto F = [&](int x, int y) -> int& { return fd[x - li + 1][y - lj + 1]; };
      F(li - 1, lj - 1) = 0;
      for (int x = li; x <= i; ++x) F(x, lj - 1) = F(x - 1, lj - 1) + 1;
      for (int y = lj; y <= j; ++y) F(li - 1, y) = F(li - 1, y - 1) + 1;
      for (int x = li; x <= i; ++x) {
        for (int y = lj; y <= j; ++y) {
          const int del = F(x - 1, y) + 1;
          const int ins = F(x, y - 1) + 1;
          if (pa.leftmost[x] == li && pb.leftmost[y] == lj) {
            const int ren = a.nodes[pa.node[x]].same_label(b.nodes[pb.node[y]]) ? 0 : 1;
            F(x, y) = std::min({del, ins, F(x - 1, y - 1) + ren});
            td[x][y] = F(x, y);
          } else {
            F(x, y) = std::min({del, ins, F(pa.leftmost[x] - 1, pb.leftmost[y] - 1) + td[x][y]});
          }
        }
      }
    }
  }
  return td[n][m];
}

double teds(const StructureTree& a, const StructureTree& b) {
  const int denom = std::max(a.size(), b.size());
  if (denom == 0) return 1.0;
  return 1.0 - static_cast<double>(tree_edit_distance(a, b)) / denom;
}

}  // namespace tsrkit
