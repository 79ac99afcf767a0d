#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "embedmap/dataset.hpp"

namespace embedmap {

struct TreeParams {
  int max_depth = 10;
  std::size_t min_samples_leaf = 1;
  double min_gain = 0.0;

  // Throws kInvalidArgument.
  void Validate() const;

  bool operator==(const TreeParams&) const = default;
};

// Gains closer than this (bits) to the best gain count as ties, and a split
// must beat min_gain by more than this to be realized. Absorbs summation-order
// noise so mathematically equal gains tie-break on (dim, threshold).
inline constexpr double kGainTolerance = 1e-12;

struct TreeNode {
  // Internal nodes: route left iff sample[split_dim] <= threshold.
  std::size_t split_dim = 0;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaves: leaf_id >= 0 and the training rows routed here.
  std::int32_t leaf_id = -1;
  std::vector<std::size_t> samples;

  bool is_leaf() const noexcept { return leaf_id >= 0; }
  bool operator==(const TreeNode&) const = default;
};

// Nodes are stored in pre-order (root first, left subtree before right), so
// leaf ids run 0..L-1 left to right.
class DecisionTree {
 public:
  DecisionTree() = default;
  // Throws kMalformedFile if the nodes do not form a valid rooted binary tree
  // with contiguous pre-order leaf ids.
  DecisionTree(std::vector<TreeNode> nodes, std::size_t dim_count);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t dim_count() const noexcept { return dim_count_; }
  std::size_t leaf_count() const noexcept { return leaf_nodes_.size(); }
  // Node index of each leaf, by leaf id.
  const std::vector<std::size_t>& leaf_nodes() const noexcept {
    return leaf_nodes_;
  }
  const TreeNode& leaf(std::size_t leaf_id) const {
    return nodes_[leaf_nodes_.at(leaf_id)];
  }
  int depth() const noexcept { return depth_; }

  // Leaf id reached by the routing rule. Caller guarantees sample size.
  std::size_t Route(std::span<const double> sample) const;
  // Split dims on the root-to-leaf path, in path order (may repeat).
  std::vector<std::size_t> PathDims(std::size_t leaf_id) const;

  bool operator==(const DecisionTree& other) const {
    return dim_count_ == other.dim_count_ && nodes_ == other.nodes_;
  }

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> leaf_nodes_;
  std::vector<std::int32_t> parent_;
  std::size_t dim_count_ = 0;
  int depth_ = 0;
};

struct Split {
  std::size_t dim = 0;
  double threshold = 0.0;
  double gain = 0.0;

  bool operator==(const Split&) const = default;
};

// Shannon entropy in bits. Throws kEmptyCounts when every count is zero.
double Entropy(std::span<const std::size_t> counts);

// Best (dim, midpoint threshold) by information gain over `samples`.
// Among candidates within kGainTolerance of the maximum, the lowest dim and
// then the lowest threshold wins. Absent when fewer than two samples, no
// dimension has two distinct values, or the best gain does not exceed
// min_gain + kGainTolerance.
std::optional<Split> BestSplit(std::span<const std::size_t> samples,
                               const LabeledEmbeddingSet& set,
                               double min_gain = 0.0);

// Greedy depth-bounded tree. Deterministic; the per-dimension scan runs in
// parallel (see EMBEDMAP_THREADS) without changing the result.
DecisionTree FitTree(const LabeledEmbeddingSet& set, const TreeParams& params);

}  // namespace embedmap
