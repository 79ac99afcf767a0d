#include "embedmap/manifold.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "embedmap/error.hpp"

namespace embedmap {

std::size_t LeafRegion::sample_count() const noexcept {
  return std::accumulate(outcome_counts.begin(), outcome_counts.end(),
                         std::size_t{0});
}

bool LeafRegion::Contains(std::span<const double> sample) const noexcept {
  return std::all_of(hull.begin(), hull.end(), [&](const HullInterval& h) {
    return h.Contains(sample[h.dim]);
  });
}

double LeafRegion::FailureProbability(
    const OutcomeVocabulary& vocabulary) const {
  double p = 0.0;
  for (std::size_t a = 0; a < outcome_probs.size(); ++a) {
    if (vocabulary.IsFailure(static_cast<OutcomeId>(a))) p += outcome_probs[a];
  }
  return p;
}

EmbeddingMap::EmbeddingMap(DecisionTree tree, std::vector<LeafRegion> regions,
                           OutcomeVocabulary vocabulary, TreeParams params,
                           Provenance provenance)
    : tree_(std::move(tree)),
      regions_(std::move(regions)),
      vocabulary_(std::move(vocabulary)),
      params_(params),
      provenance_(std::move(provenance)) {
  if (regions_.size() != tree_.leaf_count()) {
    throw Error(ErrorCode::kMalformedFile,
                std::to_string(regions_.size()) + " regions for " +
                    std::to_string(tree_.leaf_count()) + " leaves");
  }
  for (std::size_t l = 0; l < regions_.size(); ++l) {
    const auto& region = regions_[l];
    if (region.leaf_id != l) {
      throw Error(ErrorCode::kMalformedFile,
                  "region " + std::to_string(l) + " has leaf_id " +
                      std::to_string(region.leaf_id));
    }
    if (region.outcome_counts.size() != vocabulary_.size() ||
        region.outcome_probs.size() != vocabulary_.size()) {
      throw Error(ErrorCode::kMalformedFile,
                  "region " + std::to_string(l) +
                      " outcome vector does not match the vocabulary");
    }
    if (region.sample_count() == 0) {
      throw Error(ErrorCode::kEmptyLeaf,
                  "leaf " + std::to_string(l) + " has no test samples");
    }
    if (region.hull.size() != region.path_dims.size()) {
      throw Error(ErrorCode::kMalformedFile,
                  "region " + std::to_string(l) + " hull/path_dims mismatch");
    }
    for (std::size_t i = 0; i < region.hull.size(); ++i) {
      const auto& h = region.hull[i];
      if (h.dim != region.path_dims[i] || h.dim >= tree_.dim_count() ||
          !(h.lo <= h.hi)) {
        throw Error(ErrorCode::kMalformedFile,
                    "region " + std::to_string(l) + " has a bad interval");
      }
      if (i > 0 && region.path_dims[i - 1] >= region.path_dims[i]) {
        throw Error(ErrorCode::kMalformedFile,
                    "region " + std::to_string(l) +
                        " path_dims are not sorted and distinct");
      }
    }
  }
}

std::size_t EmbeddingMap::sample_count() const noexcept {
  std::size_t n = 0;
  for (const auto& r : regions_) n += r.sample_count();
  return n;
}

std::vector<std::vector<std::size_t>> PartitionByLeaf(
    const DecisionTree& tree, const LabeledEmbeddingSet& set) {
  if (set.dim_count() != tree.dim_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "set has D=" + std::to_string(set.dim_count()) +
                    ", tree expects D=" + std::to_string(tree.dim_count()));
  }
  std::vector<std::vector<std::size_t>> parts(tree.leaf_count());
  for (std::size_t i = 0; i < set.sample_count(); ++i) {
    parts[tree.Route(set.row(i))].push_back(i);
  }
  return parts;
}

EmbeddingMap BuildMap(const DecisionTree& tree, const LabeledEmbeddingSet& set,
                      const TreeParams& params, Provenance provenance) {
  const auto parts = PartitionByLeaf(tree, set);
  const std::size_t k = set.vocabulary().size();
  std::vector<LeafRegion> regions(tree.leaf_count());
  for (std::size_t l = 0; l < regions.size(); ++l) {
    const auto& members = parts[l];
    if (members.empty()) {
      throw Error(ErrorCode::kEmptyLeaf,
                  "no samples of this set reach leaf " + std::to_string(l));
    }
    auto& region = regions[l];
    region.leaf_id = l;
    region.path_dims = tree.PathDims(l);
    std::sort(region.path_dims.begin(), region.path_dims.end());
    region.path_dims.erase(
        std::unique(region.path_dims.begin(), region.path_dims.end()),
        region.path_dims.end());
    for (auto d : region.path_dims) {
      HullInterval h{d, set.at(members.front(), d), set.at(members.front(), d)};
      for (auto i : members) {
        h.lo = std::min(h.lo, set.at(i, d));
        h.hi = std::max(h.hi, set.at(i, d));
      }
      region.hull.push_back(h);
    }
    region.outcome_counts.assign(k, 0);
    for (auto i : members) ++region.outcome_counts[set.outcome(i)];
    region.outcome_probs.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
      region.outcome_probs[a] = static_cast<double>(region.outcome_counts[a]) /
                                static_cast<double>(members.size());
    }
  }
  return EmbeddingMap(tree, std::move(regions), set.vocabulary(), params,
                      std::move(provenance));
}

}  // namespace embedmap
