#include "embedmap/inference.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "embedmap/error.hpp"
#include "embedmap/parallel.hpp"

namespace embedmap {

double NgpReport::CorrectProbability() const {
  double p = 0.0;
  for (std::size_t a = 0; a < outcome_probs.size(); ++a) {
    if (!vocabulary.IsFailure(static_cast<OutcomeId>(a))) p += outcome_probs[a];
  }
  return p;
}

double NgpReport::FailureProbability() const {
  double p = 0.0;
  for (std::size_t a = 0; a < outcome_probs.size(); ++a) {
    if (vocabulary.IsFailure(static_cast<OutcomeId>(a))) p += outcome_probs[a];
  }
  return p;
}

LeafSlot AssignLeaf(const EmbeddingMap& map, std::span<const double> sample) {
  if (sample.size() != map.dim_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample has D=" + std::to_string(sample.size()) +
                    ", map expects D=" + std::to_string(map.dim_count()));
  }
  for (std::size_t d = 0; d < sample.size(); ++d) {
    if (!std::isfinite(sample[d])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "sample coordinate " + std::to_string(d));
    }
  }
  const std::size_t leaf = map.tree().Route(sample);
  if (map.region(leaf).Contains(sample)) return leaf;
  return std::nullopt;
}

LeafAssignment AssignAll(const EmbeddingMap& map,
                         const UnlabeledEmbeddingSet& set) {
  if (set.dim_count() != map.dim_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "operating set has D=" + std::to_string(set.dim_count()) +
                    ", map expects D=" + std::to_string(map.dim_count()));
  }
  LeafAssignment assignment;
  assignment.leaves.resize(set.sample_count());
  ParallelFor(
      set.sample_count(),
      [&](std::size_t i) { assignment.leaves[i] = AssignLeaf(map, set.row(i)); },
      4096);
  assignment.counts.assign(map.leaf_count() + 1, 0);
  for (const auto& slot : assignment.leaves) {
    ++assignment.counts[slot ? *slot : map.leaf_count()];
  }
  return assignment;
}

NgpReport NgpPredict(const EmbeddingMap& map, const LeafAssignment& assignment) {
  const std::size_t m = assignment.sample_count();
  if (m == 0) {
    throw Error(ErrorCode::kEmptyOperatingSet, "no operating samples");
  }
  if (assignment.counts.size() != map.leaf_count() + 1 ||
      std::accumulate(assignment.counts.begin(), assignment.counts.end(),
                      std::size_t{0}) != m) {
    throw Error(ErrorCode::kLengthMismatch,
                "assignment does not belong to this map");
  }
  NgpReport report;
  report.vocabulary = map.vocabulary();
  report.sample_count = m;
  report.outcome_probs.assign(map.vocabulary().size(), 0.0);
  report.leaf_masses.resize(map.leaf_count());
  const double total = static_cast<double>(m);
  for (std::size_t l = 0; l < map.leaf_count(); ++l) {
    const double mass = static_cast<double>(assignment.counts[l]) / total;
    report.leaf_masses[l] = mass;
    const auto& probs = map.region(l).outcome_probs;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      report.outcome_probs[a] += probs[a] * mass;
    }
  }
  report.unknown_prob =
      static_cast<double>(assignment.unknown_count()) / total;
  return report;
}

ErrorPrediction PredictErrors(const EmbeddingMap& map,
                              const LeafAssignment& assignment,
                              UnknownPolicy policy) {
  std::vector<bool> failing(map.leaf_count());
  for (std::size_t l = 0; l < map.leaf_count(); ++l) {
    // Compared on integer counts so the strict 0.5 boundary is exact.
    const auto& region = map.region(l);
    std::size_t failures = 0;
    for (std::size_t a = 0; a < region.outcome_counts.size(); ++a) {
      if (map.vocabulary().IsFailure(static_cast<OutcomeId>(a))) {
        failures += region.outcome_counts[a];
      }
    }
    failing[l] = 2 * failures > region.sample_count();
  }
  const auto unknown_flag = policy == UnknownPolicy::kOptimistic
                                ? ErrorFlag::kCorrect
                                : ErrorFlag::kMisclassified;
  ErrorPrediction prediction;
  prediction.flags.reserve(assignment.sample_count());
  for (const auto& slot : assignment.leaves) {
    const auto flag = !slot ? unknown_flag
                      : failing.at(*slot) ? ErrorFlag::kMisclassified
                                          : ErrorFlag::kCorrect;
    prediction.flags.push_back(flag);
    if (flag == ErrorFlag::kMisclassified) ++prediction.rejected;
  }
  return prediction;
}

std::vector<std::size_t> BaselineRejectLowest(std::span<const double> scores,
                                              std::size_t n) {
  if (n > scores.size()) {
    throw Error(ErrorCode::kCountExceedsSamples,
                "cannot reject " + std::to_string(n) + " of " +
                    std::to_string(scores.size()) + " samples");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::kNonFiniteValue, "score " + std::to_string(i));
    }
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return scores[a] < scores[b] ||
                             (scores[a] == scores[b] && a < b);
                    });
  order.resize(n);
  return order;
}

std::string_view ErrorFlagName(ErrorFlag flag) {
  return flag == ErrorFlag::kCorrect ? "correct" : "misclassified";
}

ErrorFlag ParseErrorFlag(std::string_view name) {
  if (name == "correct") return ErrorFlag::kCorrect;
  if (name == "misclassified") return ErrorFlag::kMisclassified;
  throw Error(ErrorCode::kMalformedFile,
              "unknown flag '" + std::string(name) + "'");
}

nlohmann::ordered_json ReportToJson(const NgpReport& report) {
  nlohmann::ordered_json probs = nlohmann::ordered_json::object();
  for (const auto& kind : report.vocabulary.kinds()) {
    probs[kind.name] = report.outcome_probs.at(kind.id);
  }
  nlohmann::ordered_json vocabulary = nlohmann::ordered_json::array();
  for (const auto& kind : report.vocabulary.kinds()) {
    vocabulary.push_back(
        {{"id", kind.id}, {"name", kind.name}, {"is_failure", kind.is_failure}});
  }
  return {{"outcome_probs", std::move(probs)},
          {"unknown_prob", report.unknown_prob},
          {"leaf_masses", report.leaf_masses},
          {"sample_count", report.sample_count},
          {"outcome_vocabulary", std::move(vocabulary)}};
}

NgpReport ReportFromJson(const nlohmann::ordered_json& json) {
  try {
    std::vector<OutcomeKind> kinds;
    for (const auto& k : json.at("outcome_vocabulary")) {
      kinds.push_back({static_cast<OutcomeId>(k.at("id").get<std::size_t>()),
                       k.at("name").get<std::string>(),
                       k.at("is_failure").get<bool>()});
    }
    NgpReport report;
    report.vocabulary = OutcomeVocabulary(std::move(kinds));
    const auto& probs = json.at("outcome_probs");
    for (const auto& kind : report.vocabulary.kinds()) {
      report.outcome_probs.push_back(probs.at(kind.name).get<double>());
    }
    report.unknown_prob = json.at("unknown_prob").get<double>();
    report.leaf_masses = json.at("leaf_masses").get<std::vector<double>>();
    report.sample_count = json.at("sample_count").get<std::size_t>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                std::string("NGP report JSON: ") + e.what());
  }
}

void WriteAssignmentCsv(std::ostream& out, const LeafAssignment& assignment,
                        const ErrorPrediction& prediction,
                        const std::vector<ErrorFlag>* baseline) {
  out << "sample_index,leaf_id_or_UNKNOWN,predicted_flag";
  if (baseline != nullptr) out << ",baseline_flag";
  out << '\n';
  for (std::size_t i = 0; i < assignment.sample_count(); ++i) {
    out << i << ',';
    if (const auto& slot = assignment.leaves[i]) {
      out << *slot;
    } else {
      out << "UNKNOWN";
    }
    out << ',' << ErrorFlagName(prediction.flags.at(i));
    if (baseline != nullptr) out << ',' << ErrorFlagName(baseline->at(i));
    out << '\n';
  }
}

FlagTable ReadFlagsCsv(std::istream& in, std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": empty flags file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool has_baseline =
      line == "sample_index,leaf_id_or_UNKNOWN,predicted_flag,baseline_flag";
  if (!has_baseline && line != "sample_index,leaf_id_or_UNKNOWN,predicted_flag") {
    throw Error(ErrorCode::kMalformedFile,
                std::string(source) + ": unexpected header '" + line + "'");
  }
  FlagTable table;
  if (has_baseline) table.baseline.emplace();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view view(line);
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      cells.push_back(view.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != (has_baseline ? 4u : 3u) ||
        cells[0] != std::to_string(row)) {
      throw Error(ErrorCode::kMalformedFile,
                  std::string(source) + ": bad row " + std::to_string(row));
    }
    table.predicted.push_back(ParseErrorFlag(cells[2]));
    if (has_baseline) table.baseline->push_back(ParseErrorFlag(cells[3]));
    ++row;
  }
  return table;
}

}  // namespace embedmap
