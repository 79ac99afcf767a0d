#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embedmap/dataset.hpp"
#include "embedmap/tree.hpp"

namespace embedmap {

struct HullInterval {
  std::size_t dim = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool Contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool operator==(const HullInterval&) const = default;
};

// Tested region of one leaf: a closed box over the leaf's path dimensions,
// bounded by the leaf's own test samples, plus its outcome statistics.
struct LeafRegion {
  std::size_t leaf_id = 0;
  std::vector<std::size_t> path_dims;  // sorted, distinct
  std::vector<HullInterval> hull;      // one per path dim, same order
  std::vector<std::size_t> outcome_counts;
  std::vector<double> outcome_probs;

  std::size_t sample_count() const noexcept;
  bool Contains(std::span<const double> sample) const noexcept;
  // Sum of p(a|l) over failure outcomes.
  double FailureProbability(const OutcomeVocabulary& vocabulary) const;

  bool operator==(const LeafRegion&) const = default;
};

struct Provenance {
  std::string internal_checksum;
  std::string created;  // ISO-8601 UTC

  bool operator==(const Provenance&) const = default;
};

// Fitted tree plus per-leaf tested regions. Immutable after construction.
class EmbeddingMap {
 public:
  EmbeddingMap() = default;
  // Throws kMalformedFile when regions do not line up with the tree leaves.
  EmbeddingMap(DecisionTree tree, std::vector<LeafRegion> regions,
               OutcomeVocabulary vocabulary, TreeParams params,
               Provenance provenance);

  const DecisionTree& tree() const noexcept { return tree_; }
  const std::vector<LeafRegion>& regions() const noexcept { return regions_; }
  const LeafRegion& region(std::size_t leaf_id) const {
    return regions_.at(leaf_id);
  }
  const OutcomeVocabulary& vocabulary() const noexcept { return vocabulary_; }
  const TreeParams& params() const noexcept { return params_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  std::size_t dim_count() const noexcept { return tree_.dim_count(); }
  std::size_t leaf_count() const noexcept { return regions_.size(); }
  std::size_t sample_count() const noexcept;

  bool operator==(const EmbeddingMap&) const = default;

 private:
  DecisionTree tree_;
  std::vector<LeafRegion> regions_;
  OutcomeVocabulary vocabulary_;
  TreeParams params_;
  Provenance provenance_;
};

// Rows of `set` grouped by the leaf the tree routes them to.
std::vector<std::vector<std::size_t>> PartitionByLeaf(
    const DecisionTree& tree, const LabeledEmbeddingSet& set);

// Throws kDimensionMismatch or kEmptyLeaf.
EmbeddingMap BuildMap(const DecisionTree& tree, const LabeledEmbeddingSet& set,
                      const TreeParams& params = {},
                      Provenance provenance = {});

// JSON schema version written by SaveMapJson.
inline constexpr int kMapSchemaVersion = 1;

std::string MapToJson(const EmbeddingMap& map);
// Throws kMalformedFile on schema violations.
EmbeddingMap MapFromJson(std::string_view json);
void SaveMap(const std::filesystem::path& path, const EmbeddingMap& map);
EmbeddingMap LoadMap(const std::filesystem::path& path);

}  // namespace embedmap
