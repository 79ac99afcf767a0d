#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace embedmap {

using OutcomeId = std::uint16_t;

struct OutcomeKind {
  OutcomeId id = 0;
  std::string name;
  bool is_failure = false;

  bool operator==(const OutcomeKind&) const = default;
};

// Ordered set of outcome kinds. Ids are the positions 0..size()-1.
class OutcomeVocabulary {
 public:
  OutcomeVocabulary() = default;

  // Throws kInvalidArgument on empty input or duplicate names.
  explicit OutcomeVocabulary(std::vector<OutcomeKind> kinds);

  // TP, FN, FP, TN with FN and FP flagged as failures.
  static OutcomeVocabulary BinaryClassification();

  // Parses "name:flag,name:flag,..." where flag is 0/1 (or false/true).
  static OutcomeVocabulary Parse(std::string_view text);

  std::size_t size() const noexcept { return kinds_.size(); }
  const std::vector<OutcomeKind>& kinds() const noexcept { return kinds_; }
  const OutcomeKind& operator[](OutcomeId id) const { return kinds_.at(id); }

  std::optional<OutcomeId> Find(std::string_view name) const;
  // Like Find but throws kUnknownOutcomeLabel.
  OutcomeId Lookup(std::string_view name) const;

  bool IsFailure(OutcomeId id) const { return kinds_.at(id).is_failure; }
  bool Contains(OutcomeId id) const noexcept { return id < kinds_.size(); }

  std::string ToString() const;

  bool operator==(const OutcomeVocabulary&) const = default;

 private:
  std::vector<OutcomeKind> kinds_;
};

// Fixed ids of the binary-classification vocabulary.
namespace binary {
inline constexpr OutcomeId kTruePositive = 0;
inline constexpr OutcomeId kFalseNegative = 1;
inline constexpr OutcomeId kFalsePositive = 2;
inline constexpr OutcomeId kTrueNegative = 3;
}  // namespace binary

enum class BinaryClass : std::uint8_t { kNegative = 0, kPositive = 1 };

// Outcome id in BinaryClassification() for a prediction against the truth.
OutcomeId DeriveOutcome(BinaryClass predicted, BinaryClass truth) noexcept;

}  // namespace embedmap
