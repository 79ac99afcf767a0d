#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "embedmap/outcome.hpp"

namespace embedmap {

// Row-major sample matrix of finite doubles. Immutable once built.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Throws kMalformedFile when values.size() != rows * dims or either is 0,
  // kNonFiniteValue naming the first offending row/column.
  EmbeddingMatrix(std::vector<double> values, std::size_t rows,
                  std::size_t dims);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dims_, dims_};
  }
  double at(std::size_t i, std::size_t d) const {
    return values_[i * dims_ + d];
  }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::vector<double> values_;
  std::size_t rows_ = 0;
  std::size_t dims_ = 0;
};

// Internal test set: embeddings with one observed outcome per sample.
class LabeledEmbeddingSet {
 public:
  LabeledEmbeddingSet() = default;
  // Throws kLengthMismatch or kUnknownOutcomeLabel on inconsistent outcomes.
  LabeledEmbeddingSet(EmbeddingMatrix embeddings,
                      std::vector<OutcomeId> outcomes,
                      OutcomeVocabulary vocabulary);

  std::size_t sample_count() const noexcept { return embeddings_.rows(); }
  std::size_t dim_count() const noexcept { return embeddings_.dims(); }

  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
  std::span<const double> row(std::size_t i) const {
    return embeddings_.row(i);
  }
  double at(std::size_t i, std::size_t d) const { return embeddings_.at(i, d); }

  const std::vector<OutcomeId>& outcomes() const noexcept { return outcomes_; }
  OutcomeId outcome(std::size_t i) const { return outcomes_[i]; }
  const OutcomeVocabulary& vocabulary() const noexcept { return vocabulary_; }

  bool operator==(const LabeledEmbeddingSet&) const = default;

 private:
  EmbeddingMatrix embeddings_;
  std::vector<OutcomeId> outcomes_;
  OutcomeVocabulary vocabulary_;
};

// External operating set: embeddings only.
class UnlabeledEmbeddingSet {
 public:
  UnlabeledEmbeddingSet() = default;
  explicit UnlabeledEmbeddingSet(EmbeddingMatrix embeddings)
      : embeddings_(std::move(embeddings)) {}

  std::size_t sample_count() const noexcept { return embeddings_.rows(); }
  std::size_t dim_count() const noexcept { return embeddings_.dims(); }

  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
  std::span<const double> row(std::size_t i) const {
    return embeddings_.row(i);
  }
  double at(std::size_t i, std::size_t d) const { return embeddings_.at(i, d); }

  bool operator==(const UnlabeledEmbeddingSet&) const = default;

 private:
  EmbeddingMatrix embeddings_;
};

// Empirical frequency of every outcome id in the set, indexed by id.
std::vector<std::size_t> CountOutcomes(const LabeledEmbeddingSet& set);

}  // namespace embedmap
