#include "embedmap/dataset.hpp"

#include <cmath>
#include <string>

#include "embedmap/error.hpp"

namespace embedmap {

EmbeddingMatrix::EmbeddingMatrix(std::vector<double> values, std::size_t rows,
                                 std::size_t dims)
    : values_(std::move(values)), rows_(rows), dims_(dims) {
  if (rows_ == 0) {
    throw Error(ErrorCode::kMalformedFile, "embedding set has no samples");
  }
  if (dims_ == 0) {
    throw Error(ErrorCode::kMalformedFile, "embedding set has no dimensions");
  }
  if (values_.size() / dims_ != rows_ || values_.size() % dims_ != 0) {
    throw Error(ErrorCode::kMalformedFile,
                "expected " + std::to_string(rows_) + "x" +
                    std::to_string(dims_) + " values, got " +
                    std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "row " + std::to_string(i / dims_) + ", column " +
                      std::to_string(i % dims_));
    }
  }
}

LabeledEmbeddingSet::LabeledEmbeddingSet(EmbeddingMatrix embeddings,
                                         std::vector<OutcomeId> outcomes,
                                         OutcomeVocabulary vocabulary)
    : embeddings_(std::move(embeddings)),
      outcomes_(std::move(outcomes)),
      vocabulary_(std::move(vocabulary)) {
  if (outcomes_.size() != embeddings_.rows()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(outcomes_.size()) + " outcomes for " +
                    std::to_string(embeddings_.rows()) + " samples");
  }
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    if (!vocabulary_.Contains(outcomes_[i])) {
      throw Error(ErrorCode::kUnknownOutcomeLabel,
                  "outcome id " + std::to_string(outcomes_[i]) + " at row " +
                      std::to_string(i));
    }
  }
}

std::vector<std::size_t> CountOutcomes(const LabeledEmbeddingSet& set) {
  std::vector<std::size_t> counts(set.vocabulary().size(), 0);
  for (auto id : set.outcomes()) ++counts[id];
  return counts;
}

}  // namespace embedmap
