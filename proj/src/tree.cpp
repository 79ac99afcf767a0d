#include "embedmap/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "embedmap/error.hpp"
#include "embedmap/parallel.hpp"

namespace embedmap {

void TreeParams::Validate() const {
  if (max_depth < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_depth must be >= 1, got " + std::to_string(max_depth));
  }
  if (min_samples_leaf < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_samples_leaf must be >= 1");
  }
  if (!(min_gain >= 0.0) || !std::isfinite(min_gain)) {
    throw Error(ErrorCode::kInvalidArgument,
                "min_gain must be a finite non-negative number");
  }
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t dim_count)
    : nodes_(std::move(nodes)), dim_count_(dim_count) {
  if (nodes_.empty()) {
    throw Error(ErrorCode::kMalformedFile, "tree has no nodes");
  }
  if (dim_count_ == 0) {
    throw Error(ErrorCode::kMalformedFile, "tree has zero dimensions");
  }
  parent_.assign(nodes_.size(), -1);
  // Pre-order walk must visit nodes exactly in storage order.
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  std::size_t expected = 0;
  while (!stack.empty()) {
    const auto [index, depth] = stack.back();
    stack.pop_back();
    if (index != expected) {
      throw Error(ErrorCode::kMalformedFile,
                  "node " + std::to_string(index) +
                      " is not stored in pre-order position " +
                      std::to_string(expected));
    }
    ++expected;
    depth_ = std::max(depth_, depth);
    const auto& node = nodes_[index];
    if (node.is_leaf()) {
      if (static_cast<std::size_t>(node.leaf_id) != leaf_nodes_.size()) {
        throw Error(ErrorCode::kMalformedFile,
                    "leaf ids are not contiguous in pre-order at node " +
                        std::to_string(index));
      }
      leaf_nodes_.push_back(index);
      continue;
    }
    const auto in_range = [&](std::int32_t child) {
      return child > static_cast<std::int32_t>(index) &&
             static_cast<std::size_t>(child) < nodes_.size();
    };
    if (!in_range(node.left) || !in_range(node.right) ||
        node.split_dim >= dim_count_ || !std::isfinite(node.threshold)) {
      throw Error(ErrorCode::kMalformedFile,
                  "invalid internal node " + std::to_string(index));
    }
    parent_[node.left] = static_cast<std::int32_t>(index);
    parent_[node.right] = static_cast<std::int32_t>(index);
    stack.emplace_back(node.right, depth + 1);
    stack.emplace_back(node.left, depth + 1);
  }
  if (expected != nodes_.size()) {
    throw Error(ErrorCode::kMalformedFile,
                std::to_string(nodes_.size() - expected) +
                    " nodes are unreachable from the root");
  }
}

std::size_t DecisionTree::Route(std::span<const double> sample) const {
  std::size_t index = 0;
  while (!nodes_[index].is_leaf()) {
    const auto& node = nodes_[index];
    index = sample[node.split_dim] <= node.threshold ? node.left : node.right;
  }
  return static_cast<std::size_t>(nodes_[index].leaf_id);
}

std::vector<std::size_t> DecisionTree::PathDims(std::size_t leaf_id) const {
  std::vector<std::size_t> dims;
  auto index = static_cast<std::int32_t>(leaf_nodes_.at(leaf_id));
  while (parent_[index] >= 0) {
    index = parent_[index];
    dims.push_back(nodes_[index].split_dim);
  }
  std::reverse(dims.begin(), dims.end());
  return dims;
}

double Entropy(std::span<const std::size_t> counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(),
                                            std::size_t{0});
  if (total == 0) {
    throw Error(ErrorCode::kEmptyCounts, "entropy of an empty count vector");
  }
  double h = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

struct ValueOutcome {
  double value;
  OutcomeId outcome;
};

class SplitScanner {
 public:
  SplitScanner(std::span<const std::size_t> samples,
               const LabeledEmbeddingSet& set)
      : samples_(samples), set_(set), k_(set.vocabulary().size()) {
    parent_counts_.assign(k_, 0);
    for (auto s : samples_) ++parent_counts_[set_.outcome(s)];
    parent_entropy_ = Entropy(parent_counts_);
  }

  bool pure() const {
    return std::count_if(parent_counts_.begin(), parent_counts_.end(),
                         [](auto c) { return c > 0; }) <= 1;
  }

  // Calls visit(threshold, gain) for each candidate of `dim` in ascending
  // threshold order.
  template <typename Visit>
  void Scan(std::size_t dim, std::vector<ValueOutcome>& column,
            std::vector<std::size_t>& left, std::vector<std::size_t>& right,
            Visit&& visit) const {
    column.clear();
    for (auto s : samples_) column.push_back({set_.at(s, dim), set_.outcome(s)});
    std::sort(column.begin(), column.end(), [](const auto& a, const auto& b) {
      return a.value < b.value || (a.value == b.value && a.outcome < b.outcome);
    });
    const std::size_t n = column.size();
    if (column.front().value == column.back().value) return;
    left.assign(k_, 0);
    right = parent_counts_;
    const double total = static_cast<double>(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[column[i].outcome];
      --right[column[i].outcome];
      if (column[i].value == column[i + 1].value) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      const double gain =
          parent_entropy_ -
          (static_cast<double>(n_left) / total) * Entropy(left) -
          (static_cast<double>(n_right) / total) * Entropy(right);
      visit(std::midpoint(column[i].value, column[i + 1].value), gain);
    }
  }

 private:
  std::span<const std::size_t> samples_;
  const LabeledEmbeddingSet& set_;
  std::size_t k_;
  std::vector<std::size_t> parent_counts_;
  double parent_entropy_ = 0.0;
};

}  // namespace

std::optional<Split> BestSplit(std::span<const std::size_t> samples,
                               const LabeledEmbeddingSet& set,
                               double min_gain) {
  if (samples.size() < 2) return std::nullopt;
  const SplitScanner scanner(samples, set);
  if (scanner.pure()) return std::nullopt;

  const std::size_t dims = set.dim_count();
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best_per_dim(dims, kNone);
  // Each worker owns a slice of dimensions; scratch buffers are per call.
  ParallelFor(
      dims,
      [&](std::size_t d) {
        thread_local std::vector<ValueOutcome> column;
        thread_local std::vector<std::size_t> left;
        thread_local std::vector<std::size_t> right;
        double best = kNone;
        scanner.Scan(d, column, left, right,
                     [&](double, double gain) { best = std::max(best, gain); });
        best_per_dim[d] = best;
      },
      std::max<std::size_t>(1, 65536 / (samples.size() + 1)));

  const double top = *std::max_element(best_per_dim.begin(), best_per_dim.end());
  if (top == kNone || !(top > min_gain + kGainTolerance)) return std::nullopt;

  const double floor = top - kGainTolerance;
  const auto dim = static_cast<std::size_t>(
      std::find_if(best_per_dim.begin(), best_per_dim.end(),
                   [&](double g) { return g >= floor; }) -
      best_per_dim.begin());
  std::vector<ValueOutcome> column;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  std::optional<Split> chosen;
  scanner.Scan(dim, column, left, right, [&](double threshold, double gain) {
    if (!chosen && gain >= floor) chosen = Split{dim, threshold, gain};
  });
  return chosen;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const LabeledEmbeddingSet& set, const TreeParams& params)
      : set_(set), params_(params) {}

  std::vector<TreeNode> Grow() {
    std::vector<std::size_t> all(set_.sample_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    Grow(std::move(all), 0);
    return std::move(nodes_);
  }

 private:
  std::size_t Grow(std::vector<std::size_t> samples, int depth) {
    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    std::optional<Split> split;
    if (depth < params_.max_depth) {
      split = BestSplit(samples, set_, params_.min_gain);
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    if (split) {
      for (auto s : samples) {
        (set_.at(s, split->dim) <= split->threshold ? left : right).push_back(s);
      }
      if (left.size() < params_.min_samples_leaf ||
          right.size() < params_.min_samples_leaf) {
        split.reset();
      }
    }
    if (!split) {
      nodes_[index].leaf_id = next_leaf_++;
      nodes_[index].samples = std::move(samples);
      return index;
    }
    nodes_[index].split_dim = split->dim;
    nodes_[index].threshold = split->threshold;
    const auto l = Grow(std::move(left), depth + 1);
    const auto r = Grow(std::move(right), depth + 1);
    nodes_[index].left = static_cast<std::int32_t>(l);
    nodes_[index].right = static_cast<std::int32_t>(r);
    return index;
  }

  const LabeledEmbeddingSet& set_;
  const TreeParams& params_;
  std::vector<TreeNode> nodes_;
  std::int32_t next_leaf_ = 0;
};

}  // namespace

DecisionTree FitTree(const LabeledEmbeddingSet& set, const TreeParams& params) {
  params.Validate();
  if (set.sample_count() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot fit an empty set");
  }
  return DecisionTree(TreeGrower(set, params).Grow(), set.dim_count());
}

}  // namespace embedmap
