#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <iosfwd>
#include <string_view>

#include "json.hpp"

#include "embedmap/dataset.hpp"
#include "embedmap/manifold.hpp"

namespace embedmap {

// Leaf id of a tested region, or nullopt for the unknown region.
using LeafSlot = std::optional<std::size_t>;

struct LeafAssignment {
  std::vector<LeafSlot> leaves;       // per operating sample
  std::vector<std::size_t> counts;    // M^l for l < L; counts[L] = unknown

  std::size_t sample_count() const noexcept { return leaves.size(); }
  std::size_t leaf_count() const noexcept { return counts.size() - 1; }
  std::size_t unknown_count() const noexcept { return counts.back(); }
};

struct NgpReport {
  OutcomeVocabulary vocabulary;
  std::vector<double> outcome_probs;  // p(a), indexed by outcome id
  double unknown_prob = 0.0;
  std::vector<double> leaf_masses;    // p(l) = M^l / M
  std::size_t sample_count = 0;

  double CorrectProbability() const;
  double FailureProbability() const;

  bool operator==(const NgpReport&) const = default;
};

// Throws kDimensionMismatch or kNonFiniteValue.
LeafSlot AssignLeaf(const EmbeddingMap& map, std::span<const double> sample);
LeafAssignment AssignAll(const EmbeddingMap& map,
                         const UnlabeledEmbeddingSet& set);

// Throws kEmptyOperatingSet, kLengthMismatch for an assignment from a
// different map.
NgpReport NgpPredict(const EmbeddingMap& map, const LeafAssignment& assignment);

enum class ErrorFlag : std::uint8_t { kCorrect, kMisclassified };

// How samples in the unknown region are flagged. Optimistic is the default.
enum class UnknownPolicy : std::uint8_t { kOptimistic, kPessimistic };

struct ErrorPrediction {
  std::vector<ErrorFlag> flags;
  std::size_t rejected = 0;  // number flagged kMisclassified
};

// A sample is flagged misclassified iff its leaf's failure probability is
// strictly above 0.5.
ErrorPrediction PredictErrors(const EmbeddingMap& map,
                              const LeafAssignment& assignment,
                              UnknownPolicy policy = UnknownPolicy::kOptimistic);

// Indices of the n lowest scores, ascending by (score, index).
// Throws kCountExceedsSamples when n > scores.size(), kNonFiniteValue.
std::vector<std::size_t> BaselineRejectLowest(std::span<const double> scores,
                                              std::size_t n);

std::string_view ErrorFlagName(ErrorFlag flag);
ErrorFlag ParseErrorFlag(std::string_view name);

// {outcome_probs: {name: p}, unknown_prob, leaf_masses, sample_count,
//  outcome_vocabulary}
nlohmann::ordered_json ReportToJson(const NgpReport& report);
NgpReport ReportFromJson(const nlohmann::ordered_json& json);

// Per-sample CSV: sample_index,leaf_id_or_UNKNOWN,predicted_flag and, when
// `baseline` is given, a trailing baseline_flag column.
void WriteAssignmentCsv(std::ostream& out, const LeafAssignment& assignment,
                        const ErrorPrediction& prediction,
                        const std::vector<ErrorFlag>* baseline = nullptr);

struct FlagTable {
  std::vector<ErrorFlag> predicted;
  std::optional<std::vector<ErrorFlag>> baseline;
};
FlagTable ReadFlagsCsv(std::istream& in, std::string_view source = "<stream>");

}  // namespace embedmap
