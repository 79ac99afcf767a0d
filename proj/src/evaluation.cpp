#include "embedmap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "embedmap/error.hpp"

namespace embedmap {

std::size_t RoundCount(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot round a negative count");
  }
  const double floor = std::floor(value);
  const double frac = value - floor;
  auto result = static_cast<std::size_t>(floor);
  if (frac > 0.5 || (frac == 0.5 && result % 2 == 1)) ++result;
  return result;
}

double AggregateF1(std::size_t predicted_correct, std::size_t true_correct) {
  if (predicted_correct == true_correct) return 1.0;
  const double tp = static_cast<double>(std::min(predicted_correct, true_correct));
  const double fp = predicted_correct > true_correct
                        ? static_cast<double>(predicted_correct - true_correct)
                        : 0.0;
  const double fn = true_correct > predicted_correct
                        ? static_cast<double>(true_correct - predicted_correct)
                        : 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

namespace {

std::size_t CountCorrect(const OutcomeVocabulary& vocabulary,
                         std::span<const OutcomeId> truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!vocabulary.Contains(truth[i])) {
      throw Error(ErrorCode::kUnknownOutcomeLabel,
                  "truth outcome id " + std::to_string(truth[i]) + " at row " +
                      std::to_string(i));
    }
    if (!vocabulary.IsFailure(truth[i])) ++correct;
  }
  return correct;
}

}  // namespace

double F1Ngp(const NgpReport& report, std::span<const OutcomeId> truth,
             NgpMode mode) {
  if (truth.size() != report.sample_count) {
    throw Error(ErrorCode::kLengthMismatch,
                "truth has " + std::to_string(truth.size()) +
                    " samples, report has " +
                    std::to_string(report.sample_count));
  }
  double correct = report.CorrectProbability();
  if (mode == NgpMode::kOurs) correct += report.unknown_prob;
  const double m = static_cast<double>(report.sample_count);
  const auto predicted = RoundCount(std::clamp(correct, 0.0, 1.0) * m);
  return AggregateF1(predicted, CountCorrect(report.vocabulary, truth));
}

double F1ErrorPrediction(std::span<const ErrorFlag> flags,
                         const std::vector<bool>& truth_correct) {
  if (flags.size() != truth_correct.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(flags.size()) + " flags for " +
                    std::to_string(truth_correct.size()) + " truth rows");
  }
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const bool predicted = flags[i] == ErrorFlag::kCorrect;
    if (predicted && truth_correct[i]) ++tp;
    if (predicted && !truth_correct[i]) ++fp;
    if (!predicted && truth_correct[i]) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

NgpReport NaiveTestBaseline(const LabeledEmbeddingSet& internal) {
  NgpReport report;
  report.vocabulary = internal.vocabulary();
  report.sample_count = internal.sample_count();
  const auto counts = CountOutcomes(internal);
  for (auto c : counts) {
    report.outcome_probs.push_back(static_cast<double>(c) /
                                   static_cast<double>(internal.sample_count()));
  }
  return report;
}

EvalResult Evaluate(const EvalInputs& inputs) {
  if (inputs.report == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation needs a report");
  }
  const auto& report = *inputs.report;
  const auto& truth = inputs.truth;
  EvalResult result;
  result.f1_ours = F1Ngp(report, truth, NgpMode::kOurs);
  result.f1_ours_plus = F1Ngp(report, truth, NgpMode::kOursPlus);
  const auto correct = CountCorrect(report.vocabulary, truth);
  result.true_failure_prob = static_cast<double>(truth.size() - correct) /
                             static_cast<double>(truth.size());
  result.predicted_failure_prob = std::clamp(report.FailureProbability(), 0.0, 1.0);
  result.predicted_failure_plus_unknown = std::clamp(
      result.predicted_failure_prob + report.unknown_prob, 0.0, 1.0);

  std::vector<bool> truth_correct(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth_correct[i] = !report.vocabulary.IsFailure(truth[i]);
  }
  if (inputs.flags != nullptr) {
    result.error_pred_f1 = F1ErrorPrediction(*inputs.flags, truth_correct);
    const std::vector<ErrorFlag> all_correct(truth.size(), ErrorFlag::kCorrect);
    result.dnn_f1 = F1ErrorPrediction(all_correct, truth_correct);
  }
  if (inputs.baseline_flags != nullptr) {
    result.baseline_f1 = F1ErrorPrediction(*inputs.baseline_flags, truth_correct);
  }
  if (inputs.naive != nullptr) {
    NgpReport scaled = *inputs.naive;
    scaled.sample_count = truth.size();
    result.naive_test_f1 = F1Ngp(scaled, truth, NgpMode::kOurs);
  }
  return result;
}

nlohmann::ordered_json EvalToJson(const EvalResult& result) {
  nlohmann::ordered_json json = {
      {"f1_ours", result.f1_ours},
      {"f1_ours_plus", result.f1_ours_plus},
      {"true_failure_prob", result.true_failure_prob},
      {"predicted_failure_prob", result.predicted_failure_prob},
      {"predicted_failure_plus_unknown", result.predicted_failure_plus_unknown}};
  const auto put = [&](const char* key, const std::optional<double>& v) {
    json[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  put("error_pred_f1", result.error_pred_f1);
  put("baseline_f1", result.baseline_f1);
  put("dnn_f1", result.dnn_f1);
  put("naive_test_f1", result.naive_test_f1);
  return json;
}

EvalResult EvalFromJson(const nlohmann::ordered_json& json) {
  try {
    EvalResult result;
    result.f1_ours = json.at("f1_ours").get<double>();
    result.f1_ours_plus = json.at("f1_ours_plus").get<double>();
    result.true_failure_prob = json.at("true_failure_prob").get<double>();
    result.predicted_failure_prob = json.at("predicted_failure_prob").get<double>();
    result.predicted_failure_plus_unknown =
        json.at("predicted_failure_plus_unknown").get<double>();
    const auto get = [&](const char* key) -> std::optional<double> {
      if (!json.contains(key) || json.at(key).is_null()) return std::nullopt;
      return json.at(key).get<double>();
    };
    result.error_pred_f1 = get("error_pred_f1");
    result.baseline_f1 = get("baseline_f1");
    result.dnn_f1 = get("dnn_f1");
    result.naive_test_f1 = get("naive_test_f1");
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                std::string("evaluation JSON: ") + e.what());
  }
}

namespace {

std::string Cell(const std::optional<double>& value) {
  if (!value) return "-";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3f", *value);
  return buffer;
}

using Getter = std::optional<double> (*)(const EvalResult&);

void RenderTable(std::string& out, std::span<const EvalRow> rows,
                 std::string_view method_header,
                 const std::vector<std::pair<std::string, Getter>>& methods) {
  std::vector<std::string> domains;
  std::vector<std::string> maps;
  std::map<std::pair<std::string, std::string>, const EvalResult*> cells;
  for (const auto& row : rows) {
    if (std::find(domains.begin(), domains.end(), row.domain) == domains.end()) {
      domains.push_back(row.domain);
    }
    if (std::find(maps.begin(), maps.end(), row.map_name) == maps.end()) {
      maps.push_back(row.map_name);
    }
    cells[{row.domain, row.map_name}] = &row.result;
  }
  out += "| Operating Domain | ";
  out += method_header;
  for (const auto& m : maps) out += " | " + m;
  out += " |\n|---|---";
  for (std::size_t i = 0; i < maps.size(); ++i) out += "|---:";
  out += "|\n";
  for (const auto& domain : domains) {
    bool first = true;
    for (const auto& [label, get] : methods) {
      bool any = false;
      std::string line = "| " + (first ? domain : std::string()) + " | " + label;
      for (const auto& m : maps) {
        const auto it = cells.find({domain, m});
        std::optional<double> value;
        if (it != cells.end()) value = get(*it->second);
        any = any || value.has_value();
        line += " | " + Cell(value);
      }
      if (!any) continue;
      out += line + " |\n";
      first = false;
    }
  }
}

}  // namespace

std::string RenderMarkdown(std::span<const EvalRow> rows) {
  std::string out = "## Network generalization prediction F1\n\n";
  RenderTable(out, rows, "NGP",
              {{"Test Results", [](const EvalResult& r) { return r.naive_test_f1; }},
               {"Ours", [](const EvalResult& r) -> std::optional<double> {
                  return r.f1_ours;
                }},
               {"Ours+", [](const EvalResult& r) -> std::optional<double> {
                  return r.f1_ours_plus;
                }}});
  out += "\n## Failure probability\n\n";
  RenderTable(out, rows, "Estimate",
              {{"True", [](const EvalResult& r) -> std::optional<double> {
                  return r.true_failure_prob;
                }},
               {"Predicted", [](const EvalResult& r) -> std::optional<double> {
                  return r.predicted_failure_prob;
                }},
               {"Predicted + unknown",
                [](const EvalResult& r) -> std::optional<double> {
                  return r.predicted_failure_plus_unknown;
                }}});
  const bool any_flags = std::any_of(rows.begin(), rows.end(), [](const auto& r) {
    return r.result.error_pred_f1.has_value();
  });
  if (any_flags) {
    out += "\n## Error prediction F1\n\n";
    RenderTable(out, rows, "E.P.",
                {{"DNN", [](const EvalResult& r) { return r.dnn_f1; }},
                 {"Lowest score", [](const EvalResult& r) { return r.baseline_f1; }},
                 {"Ours", [](const EvalResult& r) { return r.error_pred_f1; }}});
  }
  return out;
}

}  // namespace embedmap
