#pragma once

// Weighted axis-aligned CART tree (binary, Gini impurity, no pruning).
//
// Split search is exhaustive: every axis, every midpoint between consecutive
// distinct values inside the node. Ties in impurity go to the lower axis and
// then to the lower threshold. Points equal to a threshold route left.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionboost/labels.hpp"
#include "ionboost/population.hpp"

namespace ionboost {

// Non-negative per-point weights with a positive sum.
using WeightVector = std::vector<double>;

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t axis = kLeaf;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  Label label = 1;

  bool is_leaf() const noexcept { return axis == kLeaf; }
  bool operator==(const TreeNode&) const = default;
};

// Round-trippable decimal text for a double.
inline std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class DecisionTree {
 public:
  DecisionTree() = default;

  static DecisionTree leaf(std::size_t dim, Label label) {
    if (!is_label(label)) throw std::invalid_argument("DecisionTree::leaf: label must be -1 or +1");
    DecisionTree t;
    t.dim_ = dim;
    TreeNode n;
    n.label = label;
    t.nodes_.push_back(n);
    return t;
  }

  static DecisionTree split(std::size_t axis, double threshold, const DecisionTree& left, const DecisionTree& right) {
    if (left.dim_ != right.dim_) throw std::invalid_argument("DecisionTree::split: subtree dimensions differ");
    if (axis >= left.dim_) throw std::invalid_argument("DecisionTree::split: axis out of range");
    DecisionTree t;
    t.dim_ = left.dim_;
    TreeNode root;
    root.axis = static_cast<std::int32_t>(axis);
    root.threshold = threshold;
    t.nodes_.push_back(root);
    t.nodes_[0].left = t.append(left);
    t.nodes_[0].right = t.append(right);
    return t;
  }

  std::size_t dimension() const noexcept { return dim_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }

  Label predict(std::span<const double> x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("DecisionTree::predict: expected dimension " + std::to_string(dim_) + ", got " +
                                  std::to_string(x.size()));
    const TreeNode* n = &nodes_[0];
    while (!n->is_leaf()) n = &nodes_[x[n->axis] <= n->threshold ? n->left : n->right];
    return n->label;
  }

  // Length of the longest root-to-leaf path (a single leaf has depth 0).
  std::size_t depth() const { return nodes_.empty() ? 0 : depth_from(0); }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  bool operator==(const DecisionTree&) const = default;

  // Pre-order, one node per line, indented two spaces per level:
  //   split <axis> <threshold>
  //   leaf <label>
  void write_text(std::ostream& os) const {
    os << "tree " << dim_ << ' ' << nodes_.size() << '\n';
    write_node(os, 0, 0);
  }

  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }

  static DecisionTree read_text(std::istream& is) {
    std::string word;
    std::size_t dim = 0, count = 0;
    if (!(is >> word >> dim >> count) || word != "tree" || count == 0)
      throw DataError("tree text: expected 'tree <dim> <node_count>'");
    DecisionTree t;
    t.dim_ = dim;
    t.nodes_.reserve(count);
    t.read_node(is, count);
    if (t.nodes_.size() != count) throw DataError("tree text: node count mismatch");
    return t;
  }

  static DecisionTree from_text(const std::string& text) {
    std::istringstream is(text);
    return read_text(is);
  }

 private:
  friend class TreeBuilder;

  std::int32_t append(const DecisionTree& sub) {
    const auto offset = static_cast<std::int32_t>(nodes_.size());
    for (TreeNode n : sub.nodes_) {
      if (!n.is_leaf()) {
        n.left += offset;
        n.right += offset;
      }
      nodes_.push_back(n);
    }
    return offset;
  }

  std::size_t depth_from(std::int32_t i) const {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  void write_node(std::ostream& os, std::int32_t i, std::size_t level) const {
    const TreeNode& n = nodes_[i];
    os << std::string(2 * level, ' ');
    if (n.is_leaf()) {
      os << "leaf " << n.label << '\n';
      return;
    }
    os << "split " << n.axis << ' ' << format_exact(n.threshold) << '\n';
    write_node(os, n.left, level + 1);
    write_node(os, n.right, level + 1);
  }

  std::int32_t read_node(std::istream& is, std::size_t limit) {
    if (nodes_.size() >= limit) throw DataError("tree text: more nodes than declared");
    std::string kind;
    if (!(is >> kind)) throw DataError("tree text: truncated");
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    if (kind == "leaf") {
      Label label = 0;
      if (!(is >> label) || !is_label(label)) throw DataError("tree text: bad leaf label");
      nodes_[index].label = label;
      return index;
    }
    if (kind != "split") throw DataError("tree text: unknown node kind '" + kind + "'");
    std::int32_t axis = 0;
    std::string thr;
    if (!(is >> axis >> thr) || axis < 0 || static_cast<std::size_t>(axis) >= dim_)
      throw DataError("tree text: bad split line");
    nodes_[index].axis = axis;
    try {
      nodes_[index].threshold = std::stod(thr);
    } catch (const std::exception&) {
      throw DataError("tree text: bad threshold '" + thr + "'");
    }
    const auto l = read_node(is, limit);
    nodes_[index].left = l;
    const auto r = read_node(is, limit);
    nodes_[index].right = r;
    return index;
  }

  std::size_t dim_ = 0;
  std::vector<TreeNode> nodes_;
};

// Per-axis point orders, sorted by coordinate (stable in point index).
// Computed once per training set and reused across boosting stages.
class SortedFeatures {
 public:
  explicit SortedFeatures(const TrainingSet& t) : order_(t.dimension()) {
    for (std::size_t a = 0; a < t.dimension(); ++a) {
      auto& o = order_[a];
      o.resize(t.size());
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t i, std::uint32_t j) { return t.x(i, a) < t.x(j, a); });
    }
  }
  const std::vector<std::uint32_t>& order(std::size_t axis) const { return order_[axis]; }
  std::size_t dimension() const noexcept { return order_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> order_;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& t, std::span<const double> w, std::size_t max_depth)
      : t_(t), w_(w), max_depth_(max_depth), goes_left_(t.size(), 0) {}

  DecisionTree build(const SortedFeatures& sorted) {
    DecisionTree tree;
    tree.dim_ = t_.dimension();
    std::vector<std::vector<std::uint32_t>> members(t_.dimension());
    for (std::size_t a = 0; a < t_.dimension(); ++a) members[a] = sorted.order(a);
    grow(tree, members, 0);
    return tree;
  }

 private:
  struct Split {
    std::size_t axis = 0;
    double threshold = 0.0;
    double score = 0.0;
    bool found = false;
  };

  // (W+^2 + W-^2) / W; larger means purer. Weighted Gini of a node is W - score.
  static double purity_score(double pos, double neg) {
    const double total = pos + neg;
    return total > 0.0 ? (pos * pos + neg * neg) / total : 0.0;
  }

  Split best_split(const std::vector<std::vector<std::uint32_t>>& members, double pos, double neg) const {
    const double total = pos + neg;
    Split best;
    best.score = purity_score(pos, neg);
    const double tol = 1e-12 * total;
    for (std::size_t a = 0; a < members.size(); ++a) {
      const auto& idx = members[a];
      double lp = 0.0, ln = 0.0;
      for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
        const double wj = w_[idx[j]];
        (t_.y(idx[j]) > 0 ? lp : ln) += wj;
        const double v = t_.x(idx[j], a);
        const double next = t_.x(idx[j + 1], a);
        if (!(v < next)) continue;
        const double score = purity_score(lp, ln) + purity_score(pos - lp, neg - ln);
        if (score > best.score + tol) {
          double thr = v + (next - v) / 2.0;
          if (!(thr < next)) thr = v;
          best = Split{a, thr, score, true};
        }
      }
    }
    return best;
  }

  std::int32_t grow(DecisionTree& tree, std::vector<std::vector<std::uint32_t>>& members, std::size_t depth) {
    double pos = 0.0, neg = 0.0;
    for (auto i : members[0]) (t_.y(i) > 0 ? pos : neg) += w_[i];

    const auto index = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_[index].label = pos >= neg ? 1 : -1;

    if (depth >= max_depth_ || pos == 0.0 || neg == 0.0) return index;
    const Split s = best_split(members, pos, neg);
    if (!s.found) return index;

    for (auto i : members[0]) goes_left_[i] = t_.x(i, s.axis) <= s.threshold ? 1 : 0;
    std::vector<std::vector<std::uint32_t>> left(members.size()), right(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (auto i : members[a]) (goes_left_[i] ? left[a] : right[a]).push_back(i);
    }
    members.clear();
    members.shrink_to_fit();

    tree.nodes_[index].axis = static_cast<std::int32_t>(s.axis);
    tree.nodes_[index].threshold = s.threshold;
    tree.nodes_[index].label = 1;
    const auto l = grow(tree, left, depth + 1);
    tree.nodes_[index].left = l;
    const auto r = grow(tree, right, depth + 1);
    tree.nodes_[index].right = r;
    return index;
  }

  const TrainingSet& t_;
  std::span<const double> w_;
  std::size_t max_depth_;
  std::vector<char> goes_left_;
};

inline void check_tree_inputs(const TrainingSet& t, std::span<const double> w, std::size_t max_depth) {
  if (t.empty()) throw std::invalid_argument("fit_tree: empty training set");
  if (w.size() != t.size())
    throw std::invalid_argument("fit_tree: weight vector has " + std::to_string(w.size()) + " entries for " +
                                std::to_string(t.size()) + " points");
  if (max_depth < 1) throw std::invalid_argument("fit_tree: max_depth must be >= 1");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument("fit_tree: weights must be non-negative");
    sum += v;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("fit_tree: weights must have a positive sum");
}

inline DecisionTree fit_tree(const TrainingSet& t, const SortedFeatures& sorted, std::span<const double> w,
                             std::size_t max_depth) {
  check_tree_inputs(t, w, max_depth);
  if (sorted.dimension() != t.dimension()) throw std::invalid_argument("fit_tree: presorted features do not match");
  return TreeBuilder(t, w, max_depth).build(sorted);
}

inline DecisionTree fit_tree(const TrainingSet& t, std::span<const double> w, std::size_t max_depth) {
  check_tree_inputs(t, w, max_depth);
  return TreeBuilder(t, w, max_depth).build(SortedFeatures(t));
}

inline Label predict_tree(const DecisionTree& tree, std::span<const double> x) { return tree.predict(x); }

}  // namespace ionboost
