#include "embedmap/outcome.hpp"

#include <algorithm>
#include <limits>

#include "embedmap/error.hpp"

namespace embedmap {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

OutcomeVocabulary::OutcomeVocabulary(std::vector<OutcomeKind> kinds)
    : kinds_(std::move(kinds)) {
  if (kinds_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "outcome vocabulary is empty");
  }
  if (kinds_.size() > std::numeric_limits<OutcomeId>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "too many outcome kinds");
  }
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    auto& kind = kinds_[i];
    kind.id = static_cast<OutcomeId>(i);
    if (kind.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty outcome name");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (kinds_[j].name == kind.name) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate outcome name '" + kind.name + "'");
      }
    }
  }
}

OutcomeVocabulary OutcomeVocabulary::BinaryClassification() {
  return OutcomeVocabulary({{binary::kTruePositive, "TP", false},
                            {binary::kFalseNegative, "FN", true},
                            {binary::kFalsePositive, "FP", true},
                            {binary::kTrueNegative, "TN", false}});
}

OutcomeVocabulary OutcomeVocabulary::Parse(std::string_view text) {
  std::vector<OutcomeKind> kinds;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = Trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{}
                                           : text.substr(comma + 1);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "outcome '" + std::string(item) + "' lacks ':flag'");
    }
    const auto name = Trim(item.substr(0, colon));
    const auto flag = Trim(item.substr(colon + 1));
    bool failure = false;
    if (flag == "1" || flag == "true" || flag == "failure") {
      failure = true;
    } else if (flag != "0" && flag != "false" && flag != "correct") {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad failure flag '" + std::string(flag) + "'");
    }
    kinds.push_back({0, std::string(name), failure});
  }
  return OutcomeVocabulary(std::move(kinds));
}

std::optional<OutcomeId> OutcomeVocabulary::Find(std::string_view name) const {
  const auto it = std::find_if(kinds_.begin(), kinds_.end(),
                               [&](const auto& k) { return k.name == name; });
  if (it == kinds_.end()) return std::nullopt;
  return it->id;
}

OutcomeId OutcomeVocabulary::Lookup(std::string_view name) const {
  if (auto id = Find(name)) return *id;
  throw Error(ErrorCode::kUnknownOutcomeLabel,
              "unknown outcome label '" + std::string(name) + "'");
}

std::string OutcomeVocabulary::ToString() const {
  std::string out;
  for (const auto& kind : kinds_) {
    if (!out.empty()) out += ',';
    out += kind.name;
    out += kind.is_failure ? ":1" : ":0";
  }
  return out;
}

OutcomeId DeriveOutcome(BinaryClass predicted, BinaryClass truth) noexcept {
  const bool p = predicted == BinaryClass::kPositive;
  const bool t = truth == BinaryClass::kPositive;
  if (p) return t ? binary::kTruePositive : binary::kFalsePositive;
  return t ? binary::kFalseNegative : binary::kTrueNegative;
}

}  // namespace embedmap
