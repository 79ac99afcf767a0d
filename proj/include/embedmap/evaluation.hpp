#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "embedmap/dataset.hpp"
#include "embedmap/inference.hpp"

namespace embedmap {

// Ours treats unknown mass as correct, Ours+ treats it as failure.
enum class NgpMode { kOurs, kOursPlus };

// Round half to even.
std::size_t RoundCount(double value);

// F1 from aggregate correct counts: overlap min(pred, truth) is the true
// positive mass. 1.0 when the counts agree.
double AggregateF1(std::size_t predicted_correct, std::size_t true_correct);

// Throws kLengthMismatch when truth.size() != report.sample_count.
double F1Ngp(const NgpReport& report, std::span<const OutcomeId> truth,
             NgpMode mode);

// Per-sample F1 with "correct" as the positive class; 0 when P + R = 0.
double F1ErrorPrediction(std::span<const ErrorFlag> flags,
                         const std::vector<bool>& truth_correct);

// Empirical test-set outcome distribution as a report with no unknown mass.
NgpReport NaiveTestBaseline(const LabeledEmbeddingSet& internal);

struct EvalResult {
  double f1_ours = 0.0;
  double f1_ours_plus = 0.0;
  double true_failure_prob = 0.0;
  double predicted_failure_prob = 0.0;
  double predicted_failure_plus_unknown = 0.0;
  std::optional<double> error_pred_f1;
  std::optional<double> baseline_f1;
  // F1 of the unfiltered classifier (every sample predicted correct).
  std::optional<double> dnn_f1;
  // Ours-mode F1 of the internal test-set distribution.
  std::optional<double> naive_test_f1;

  bool operator==(const EvalResult&) const = default;
};

struct EvalInputs {
  const NgpReport* report = nullptr;
  std::span<const OutcomeId> truth;
  const std::vector<ErrorFlag>* flags = nullptr;
  const std::vector<ErrorFlag>* baseline_flags = nullptr;
  const NgpReport* naive = nullptr;
};

EvalResult Evaluate(const EvalInputs& inputs);

nlohmann::ordered_json EvalToJson(const EvalResult& result);
EvalResult EvalFromJson(const nlohmann::ordered_json& json);

struct EvalRow {
  std::string domain;
  std::string map_name;
  EvalResult result;
};

// Markdown tables laid out with one row per (domain, method) and one column
// per map: the NGP F1 table and, when any row has flags, the error
// prediction F1 table.
std::string RenderMarkdown(std::span<const EvalRow> rows);

}  // namespace embedmap
