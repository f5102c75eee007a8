#pragma once

#include <string>
#include <vector>

#include "tsrkit/geometry.hpp"

namespace tsrkit {

enum class TreeLabel { Table, Tr, Td };

struct TreeNode {
  TreeLabel label = TreeLabel::Td;
  int rowspan = 1;
  int colspan = 1;
  std::vector<int> children;

  bool same_label(const TreeNode& o) const {
    return label == o.label && rowspan == o.rowspan && colspan == o.colspan;
  }
};

/// Ordered tree stored as a node array; node 0 is the root.
struct StructureTree {
  std::vector<TreeNode> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
  int add(TreeLabel label, int parent = -1, int rowspan = 1, int colspan = 1);

  /// Compact form such as table(tr(td,td[colspan=2])).
  std::string to_string() const;
};

/// Throws InvalidInput if logical rectangles overlap.
StructureTree to_structure_tree(const TableAnnotation& ann);

/// Ordered tree edit distance, unit insert/delete, rename cost 0 for equal
/// (label, rowspan, colspan) and 1 otherwise.
int tree_edit_distance(const StructureTree& a, const StructureTree& b);

/// 1 - TED / max(|a|, |b|).
double teds(const StructureTree& a, const StructureTree& b);

}  // namespace tsrkit
