#include "doctest.h"

#include <random>

#include "embedmap/error.hpp"
#include "embedmap/evaluation.hpp"
#include "test_support.hpp"

using namespace embedmap;

namespace {

NgpReport BinaryReport(double tp, double fn, double fp, double tn, double unknown,
                       std::size_t m) {
  NgpReport report;
  report.vocabulary = OutcomeVocabulary::BinaryClassification();
  report.outcome_probs = {tp, fn, fp, tn};
  report.unknown_prob = unknown;
  report.sample_count = m;
  return report;
}

std::vector<OutcomeId> Truth(std::size_t correct, std::size_t failed) {
  std::vector<OutcomeId> truth(correct, binary::kTruePositive);
  truth.insert(truth.end(), failed, binary::kFalseNegative);
  return truth;
}

constexpr auto C = ErrorFlag::kCorrect;
constexpr auto M = ErrorFlag::kMisclassified;

}  // namespace

TEST_CASE("round_count is half to even") {
  CHECK(RoundCount(0.5) == 0);
  CHECK(RoundCount(1.5) == 2);
  CHECK(RoundCount(2.5) == 2);
  CHECK(RoundCount(2.5000001) == 3);
  CHECK(RoundCount(7.49) == 7);
  CHECK(RoundCount(0.0) == 0);
  CHECK_THROWS_AS(RoundCount(-1.0), Error);
}

TEST_CASE("f1_ngp examples") {
  const auto truth = Truth(80, 20);
  const auto report = BinaryReport(0.9, 0.1, 0.0, 0.0, 0.0, 100);
  CHECK(F1Ngp(report, truth, NgpMode::kOurs) == doctest::Approx(0.9411764705882353).epsilon(1e-15));
  CHECK(AggregateF1(90, 80) == 160.0 / 170.0);
  CHECK(F1Ngp(report, truth, NgpMode::kOurs) == F1Ngp(report, truth, NgpMode::kOursPlus));

  const auto exact = BinaryReport(0.8, 0.2, 0.0, 0.0, 0.0, 100);
  CHECK(F1Ngp(exact, truth, NgpMode::kOurs) == 1.0);
  CHECK(AggregateF1(0, 0) == 1.0);
  CHECK(AggregateF1(37, 37) == 1.0);

  CHECK_THROWS_AS(F1Ngp(report, Truth(80, 19), NgpMode::kOurs), Error);
}

TEST_CASE("f1_ngp modes differ only through unknown mass") {
  const auto truth = Truth(70, 30);
  const auto report = BinaryReport(0.6, 0.2, 0.0, 0.0, 0.2, 100);
  // Ours: C_pred = 80; Ours+: C_pred = 60.
  CHECK(F1Ngp(report, truth, NgpMode::kOurs) == AggregateF1(80, 70));
  CHECK(F1Ngp(report, truth, NgpMode::kOursPlus) == AggregateF1(60, 70));
}

TEST_CASE("property: aggregate F1 symmetry and bounds") {
  for (std::size_t a = 0; a <= 40; ++a) {
    for (std::size_t b = 0; b <= 40; ++b) {
      const double f = AggregateF1(a, b);
      CHECK(f == AggregateF1(b, a));
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK((f == 1.0) == (a == b));
    }
  }
}

TEST_CASE("property: true failure rate bracketed by the two modes") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double tp = u(rng), fn = u(rng), unknown = u(rng) * 0.5 + 0.01;
    const double total = tp + fn + unknown;
    tp /= total;
    fn /= total;
    unknown /= total;
    const std::size_t m = 200;
    const auto c_plus = RoundCount(tp * m);
    const auto c_ours = RoundCount((tp + unknown) * m);
    REQUIRE(c_plus <= c_ours);
    std::uniform_int_distribution<std::size_t> pick(c_plus, c_ours);
    const auto c_true = pick(rng);
    const auto truth = Truth(c_true, m - c_true);
    const auto report = BinaryReport(tp, fn, 0.0, 0.0, unknown, m);
    const auto result = Evaluate({&report, truth});
    const double slack = 0.5 / static_cast<double>(m) + 1e-12;
    CHECK(result.true_failure_prob >= result.predicted_failure_prob - slack);
    CHECK(result.true_failure_prob <= result.predicted_failure_plus_unknown + slack);
    CHECK(result.f1_ours <= 1.0);
    CHECK(result.f1_ours_plus <= 1.0);
    // Moving C_true toward either predicted count never lowers that mode's score.
    if (c_true > c_plus) {
      CHECK(AggregateF1(c_plus, c_true - 1) >= AggregateF1(c_plus, c_true));
    }
    if (c_true < c_ours) {
      CHECK(AggregateF1(c_ours, c_true + 1) >= AggregateF1(c_ours, c_true));
    }
  }
}

TEST_CASE("f1_error_prediction examples") {
  CHECK(F1ErrorPrediction(std::vector{C, C, C}, {true, true, true}) == 1.0);
  CHECK(F1ErrorPrediction(std::vector{C, C, M, M}, {true, false, false, true}) == 0.5);
  CHECK(F1ErrorPrediction(std::vector{M, M, M}, {true, false, true}) == 0.0);
  CHECK(F1ErrorPrediction(std::vector{M, C}, {true, false}) == 0.0);
  // tp=2, fp=1, fn=1.
  CHECK(F1ErrorPrediction(std::vector{C, C, C, M, M}, {true, true, false, true, false}) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(F1ErrorPrediction(std::vector{C}, {true, true}), Error);
}

TEST_CASE("property: error F1 is one exactly when positives agree") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 9;
    std::vector<ErrorFlag> flags(n);
    std::vector<bool> truth(n);
    bool agree = true;
    bool any_positive = false;
    for (std::size_t i = 0; i < n; ++i) {
      flags[i] = coin(rng) ? C : M;
      truth[i] = coin(rng);
      agree = agree && ((flags[i] == C) == truth[i]);
      any_positive = any_positive || truth[i];
    }
    const double f = F1ErrorPrediction(flags, truth);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK((f == 1.0) == (agree && any_positive));
  }
}

TEST_CASE("naive_test_baseline") {
  const auto set = testing::MakeLabeled({{0.0}, {1.0}, {2.0}, {3.0}},
                                        {"TP", "TP", "TN", "FN"});
  const auto naive = NaiveTestBaseline(set);
  CHECK(naive.outcome_probs == std::vector<double>{0.5, 0.25, 0.0, 0.25});
  CHECK(naive.unknown_prob == 0.0);

  const auto single = NaiveTestBaseline(testing::MakeLabeled({{0.0}, {1.0}}, {"FP", "FP"}));
  CHECK(single.outcome_probs[binary::kFalsePositive] == 1.0);

  std::mt19937_64 rng(8);
  const auto random = testing::RandomLabeled(rng, 300, 4, 4, 0);
  const auto map = BuildMap(FitTree(random, {}), random);
  const auto self = NgpPredict(map, AssignAll(map, testing::AsUnlabeled(random)));
  const auto baseline = NaiveTestBaseline(random);
  for (std::size_t a = 0; a < 4; ++a) {
    CHECK(std::abs(self.outcome_probs[a] - baseline.outcome_probs[a]) <= 1e-12);
  }
}

TEST_CASE("evaluate fills optional scores and round-trips through JSON") {
  const auto truth = Truth(3, 1);
  const auto report = BinaryReport(0.5, 0.25, 0.0, 0.0, 0.25, 4);
  const std::vector<ErrorFlag> flags{C, C, M, M};
  const std::vector<ErrorFlag> baseline{C, C, C, M};
  const auto naive = BinaryReport(1.0, 0.0, 0.0, 0.0, 0.0, 999);
  const auto result = Evaluate({&report, truth, &flags, &baseline, &naive});
  CHECK(result.f1_ours == 1.0);
  CHECK(result.f1_ours_plus == AggregateF1(2, 3));
  CHECK(result.true_failure_prob == 0.25);
  CHECK(result.predicted_failure_prob == 0.25);
  CHECK(result.predicted_failure_plus_unknown == 0.5);
  CHECK(*result.error_pred_f1 == doctest::Approx(0.8));
  CHECK(*result.baseline_f1 == 1.0);
  CHECK(*result.dnn_f1 == doctest::Approx(6.0 / 7.0));
  CHECK(*result.naive_test_f1 == AggregateF1(4, 3));
  CHECK(EvalFromJson(nlohmann::ordered_json::parse(EvalToJson(result).dump())) == result);

  const auto bare = Evaluate({&report, truth});
  CHECK_FALSE(bare.error_pred_f1);
  CHECK(EvalFromJson(EvalToJson(bare)) == bare);
  CHECK_THROWS_AS(EvalFromJson(nlohmann::ordered_json::object()), Error);
}

TEST_CASE("markdown report layout") {
  EvalResult a;
  a.f1_ours = 0.9;
  a.f1_ours_plus = 0.8;
  a.naive_test_f1 = 0.5;
  a.error_pred_f1 = 0.75;
  EvalResult b;
  b.f1_ours = 1.0;
  const std::vector<EvalRow> rows{{"Night", "Resnet", a}, {"Night", "Clip", b},
                                  {"Rain", "Resnet", b}};
  const auto md = RenderMarkdown(rows);
  CHECK(md.find("| Operating Domain | NGP | Resnet | Clip |") != std::string::npos);
  CHECK(md.find("| Night | Test Results | 0.500 | - |") != std::string::npos);
  CHECK(md.find("|  | Ours | 0.900 | 1.000 |") != std::string::npos);
  CHECK(md.find("| Rain | Ours | 1.000 | - |") != std::string::npos);
  CHECK(md.find("## Error prediction F1") != std::string::npos);
  CHECK(md.find("| Night | Ours | 0.750 | - |") != std::string::npos);
  CHECK(RenderMarkdown(std::vector<EvalRow>{{"X", "m", b}}).find("Error prediction") ==
        std::string::npos);
}
