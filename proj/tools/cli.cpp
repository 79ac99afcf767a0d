#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "embedmap/error.hpp"
#include "embedmap/evaluation.hpp"
#include "embedmap/inference.hpp"
#include "embedmap/io.hpp"
#include "embedmap/manifold.hpp"
#include "embedmap/synth.hpp"
#include "embedmap/tree.hpp"

namespace embedmap::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct GlobalOptions {
  std::string format = "auto";
  int max_depth = 10;
  std::size_t min_samples_leaf = 1;
  double min_gain = 0.0;
  std::uint64_t seed = 0;
  std::string outcomes = "TP:0,FN:1,FP:1,TN:0";

  TreeParams params() const {
    TreeParams p{max_depth, min_samples_leaf, min_gain};
    p.Validate();
    return p;
  }
  OutcomeVocabulary vocabulary() const {
    return OutcomeVocabulary::Parse(outcomes);
  }
};

struct FitOptions {
  std::string internal;
  std::string out;
};

struct PredictOptions {
  std::string map;
  std::string operating;
  std::string out;
  std::string assignments;
  std::string unknown_policy = "optimistic";
};

struct ErrorsOptions {
  std::string map;
  std::string operating;
  std::string out;
  std::string scores;
  std::optional<std::size_t> n_override;
  std::string unknown_policy = "optimistic";
};

struct EvalOptions {
  std::string report;
  std::string truth;
  std::string flags;
  std::string internal;
  std::string out;
  std::string markdown;
  std::string domain = "operating";
  std::string map_name = "map";
};

struct SynthOptions {
  std::string spec;
  std::size_t n_test = 1000;
  std::size_t m_operating = 1000;
  std::string out_dir;
};

std::string FileChecksum(const fs::path& path) {
  return "sha256:" + Sha256Hex(ReadFile(path));
}

Json ProvenanceBlock(const std::vector<std::pair<std::string, fs::path>>& inputs) {
  Json checksums = Json::object();
  for (const auto& [name, path] : inputs) checksums[name] = FileChecksum(path);
  return {{"tool", std::string(kToolName)},
          {"version", std::string(kToolVersion)},
          {"inputs", std::move(checksums)}};
}

// SOURCE_DATE_EPOCH pins the timestamp for reproducible outputs.
std::string CreationTimestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long value = 0;
    const auto* end = epoch + std::char_traits<char>::length(epoch);
    const auto [ptr, ec] = std::from_chars(epoch, end, value);
    if (ec == std::errc() && ptr == end) now = static_cast<std::time_t>(value);
  }
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

fs::path Sibling(const fs::path& out, const std::string& explicit_path,
                 std::string_view suffix) {
  if (!explicit_path.empty()) return explicit_path;
  fs::path p = out;
  p.replace_extension();
  return p.string() + std::string(suffix);
}

UnknownPolicy ParsePolicy(const std::string& name) {
  if (name == "optimistic") return UnknownPolicy::kOptimistic;
  if (name == "pessimistic") return UnknownPolicy::kPessimistic;
  throw Error(ErrorCode::kInvalidArgument, "unknown policy '" + name + "'");
}

std::vector<double> LoadScores(const fs::path& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": empty scores file");
  }
  std::vector<std::string> header;
  {
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      header.push_back(cell);
    }
  }
  std::size_t column = 0;
  if (header.size() > 1) {
    const auto it = std::find(header.begin(), header.end(), "score");
    if (it == header.end()) {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ": no 'score' column");
    }
    column = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<double> scores;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string cell;
    for (std::size_t c = 0; c <= column; ++c) {
      if (!std::getline(cells, cell, ',')) {
        throw Error(ErrorCode::kMalformedFile,
                    path.string() + ": short row " + std::to_string(scores.size()));
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ": bad score '" + cell + "'");
    }
    scores.push_back(value);
  }
  return scores;
}

// Ground-truth sidecar JSON, or any CSV with an `outcome` column.
std::vector<OutcomeId> LoadTruth(const fs::path& path,
                                 const OutcomeVocabulary& vocabulary) {
  if (path.extension() == ".json") {
    Json json;
    try {
      json = Json::parse(ReadFile(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
    }
    return synth::GroundTruthFromJson(json, vocabulary).OperatingOutcomes();
  }
  std::istringstream in(ReadFile(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": empty truth file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), "outcome");
  if (it == header.end()) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": no 'outcome' column");
  }
  const auto column = static_cast<std::size_t>(it - header.begin());
  std::vector<OutcomeId> truth;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string cell;
    for (std::size_t c = 0; c <= column; ++c) {
      if (!std::getline(cells, cell, ',')) {
        throw Error(ErrorCode::kMalformedFile,
                    path.string() + ": short row " + std::to_string(truth.size()));
      }
    }
    truth.push_back(vocabulary.Lookup(cell));
  }
  return truth;
}

int CmdFit(const GlobalOptions& g, const FitOptions& o, std::ostream& out) {
  const auto params = g.params();
  const fs::path internal_path = o.internal;
  const auto set = LoadLabeled(internal_path,
                               ParseFileFormat(g.format, internal_path),
                               g.vocabulary());
  const auto tree = FitTree(set, params);
  const auto map = BuildMap(tree, set, params,
                            {Checksum(set), CreationTimestamp()});
  SaveMap(o.out, map);

  out << "leaves: " << map.leaf_count() << "\n";
  out << "depth: " << map.tree().depth() << "\n";
  for (const auto& region : map.regions()) {
    out << "leaf " << region.leaf_id << ": n=" << region.sample_count();
    for (const auto& kind : map.vocabulary().kinds()) {
      out << ' ' << kind.name << '=' << region.outcome_counts[kind.id];
    }
    out << " dims=" << region.path_dims.size() << " failure="
        << FormatDouble(region.FailureProbability(map.vocabulary())) << "\n";
  }
  return kExitOk;
}

int CmdPredict(const GlobalOptions& g, const PredictOptions& o, std::ostream& out) {
  const auto policy = ParsePolicy(o.unknown_policy);
  const fs::path map_path = o.map;
  const fs::path operating_path = o.operating;
  const auto map = LoadMap(map_path);
  const auto operating =
      LoadUnlabeled(operating_path, ParseFileFormat(g.format, operating_path));
  const auto assignment = AssignAll(map, operating);
  const auto report = NgpPredict(map, assignment);
  const auto prediction = PredictErrors(map, assignment, policy);

  Json json = ReportToJson(report);
  json["provenance"] = ProvenanceBlock({{"map", map_path}, {"operating", operating_path}});
  WriteFile(o.out, json.dump(2) + "\n");
  std::ostringstream csv;
  WriteAssignmentCsv(csv, assignment, prediction);
  WriteFile(Sibling(o.out, o.assignments, ".assignments.csv"), csv.str());

  for (const auto& kind : report.vocabulary.kinds()) {
    out << "p(" << kind.name << ") = " << FormatDouble(report.outcome_probs[kind.id])
        << "\n";
  }
  out << "p(unknown) = " << FormatDouble(report.unknown_prob) << "\n";
  return kExitOk;
}

int CmdErrors(const GlobalOptions& g, const ErrorsOptions& o, std::ostream& out) {
  const auto policy = ParsePolicy(o.unknown_policy);
  const fs::path operating_path = o.operating;
  const auto map = LoadMap(o.map);
  const auto operating =
      LoadUnlabeled(operating_path, ParseFileFormat(g.format, operating_path));
  const auto assignment = AssignAll(map, operating);
  const auto prediction = PredictErrors(map, assignment, policy);

  std::optional<std::vector<ErrorFlag>> baseline;
  std::size_t baseline_n = 0;
  if (!o.scores.empty()) {
    const auto scores = LoadScores(o.scores);
    if (scores.size() != operating.sample_count()) {
      throw Error(ErrorCode::kLengthMismatch,
                  std::to_string(scores.size()) + " scores for " +
                      std::to_string(operating.sample_count()) +
                      " operating samples");
    }
    baseline_n = o.n_override.value_or(prediction.rejected);
    baseline.emplace(scores.size(), ErrorFlag::kCorrect);
    for (auto i : BaselineRejectLowest(scores, baseline_n)) {
      (*baseline)[i] = ErrorFlag::kMisclassified;
    }
  }
  std::ostringstream csv;
  WriteAssignmentCsv(csv, assignment, prediction,
                     baseline ? &*baseline : nullptr);
  WriteFile(o.out, csv.str());

  out << "rejected: " << prediction.rejected << " of "
      << prediction.flags.size() << "\n";
  if (baseline) out << "baseline rejected: " << baseline_n << "\n";
  return kExitOk;
}

int CmdEval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out) {
  std::vector<std::pair<std::string, fs::path>> inputs{{"report", o.report},
                                                        {"truth", o.truth}};
  NgpReport report;
  try {
    report = ReportFromJson(Json::parse(ReadFile(o.report)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, o.report + ": " + e.what());
  }
  const auto truth = LoadTruth(o.truth, report.vocabulary);

  std::optional<FlagTable> flags;
  if (!o.flags.empty()) {
    inputs.emplace_back("flags", o.flags);
    std::istringstream in(ReadFile(o.flags));
    flags = ReadFlagsCsv(in, o.flags);
    if (flags->predicted.size() != truth.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  std::to_string(flags->predicted.size()) + " flags for " +
                      std::to_string(truth.size()) + " truth rows");
    }
  }
  std::optional<NgpReport> naive;
  if (!o.internal.empty()) {
    inputs.emplace_back("internal", o.internal);
    const fs::path internal_path = o.internal;
    naive = NaiveTestBaseline(LoadLabeled(
        internal_path, ParseFileFormat(g.format, internal_path), report.vocabulary));
  }

  EvalInputs eval;
  eval.report = &report;
  eval.truth = truth;
  if (flags) {
    eval.flags = &flags->predicted;
    if (flags->baseline) eval.baseline_flags = &*flags->baseline;
  }
  if (naive) eval.naive = &*naive;
  const auto result = Evaluate(eval);

  Json json = EvalToJson(result);
  json["domain"] = o.domain;
  json["map"] = o.map_name;
  json["provenance"] = ProvenanceBlock(inputs);
  WriteFile(o.out, json.dump(2) + "\n");
  const EvalRow row{o.domain, o.map_name, result};
  const auto markdown = RenderMarkdown(std::span(&row, 1));
  WriteFile(Sibling(o.out, o.markdown, ".md"), markdown);
  out << markdown;
  return kExitOk;
}

int CmdSynth(const GlobalOptions& g, const SynthOptions& o, std::ostream& out) {
  Json spec_json;
  try {
    spec_json = Json::parse(ReadFile(o.spec));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, o.spec + ": " + e.what());
  }
  const auto spec = synth::SpecFromJson(spec_json);
  const auto generated = synth::Generate(spec, o.n_test, o.m_operating, g.seed);
  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "cannot create '" + dir.string() + "'");
  }
  const auto format =
      g.format == "binary" ? FileFormat::kBinary : FileFormat::kCsv;
  const std::string ext = format == FileFormat::kCsv ? ".csv" : ".bin";
  Save(dir / ("internal" + ext), format, generated.internal);
  Save(dir / ("operating" + ext), format, generated.operating);
  Json truth = synth::GroundTruthToJson(generated.truth, spec.vocabulary);
  truth["n_test"] = o.n_test;
  truth["m_operating"] = o.m_operating;
  truth["spec"] = synth::SpecToJson(spec);
  WriteFile(dir / "ground_truth.json", truth.dump(1) + "\n");
  out << "wrote " << o.n_test << " internal and " << o.m_operating
      << " operating samples to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predict classifier performance on unlabeled operating data "
               "from a decision tree over its embedding space.",
               std::string(kToolName)};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  GlobalOptions g;
  app.add_option("--format", g.format, "Embedding file format")
      ->check(CLI::IsMember({"auto", "csv", "binary"}))
      ->capture_default_str();
  app.add_option("--max-depth", g.max_depth, "Maximum tree depth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--min-samples-leaf", g.min_samples_leaf, "Minimum samples per leaf")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--min-gain", g.min_gain, "Minimum information gain (bits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Generator seed")->capture_default_str();
  app.add_option("--outcomes", g.outcomes,
                 "Outcome vocabulary as name:failure_flag,...")
      ->capture_default_str();

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an embedding map on labeled test embeddings");
  fit_cmd->add_option("--internal", fit.internal, "Labeled internal test set")->required();
  fit_cmd->add_option("-o,--out", fit.out, "Output map JSON")->required();

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Network generalization prediction");
  predict_cmd->add_option("--map", predict.map, "Embedding map JSON")->required();
  predict_cmd->add_option("--operating", predict.operating, "Operating embeddings")->required();
  predict_cmd->add_option("-o,--out", predict.out, "Output report JSON")->required();
  predict_cmd->add_option("--assignments", predict.assignments,
                          "Per-sample CSV (default: <out>.assignments.csv)");
  predict_cmd->add_option("--unknown-policy", predict.unknown_policy,
                          "Flag for unknown-region samples")
      ->check(CLI::IsMember({"optimistic", "pessimistic"}));

  ErrorsOptions errors;
  auto* errors_cmd = app.add_subcommand("errors", "Per-sample error prediction");
  errors_cmd->add_option("--map", errors.map, "Embedding map JSON")->required();
  errors_cmd->add_option("--operating", errors.operating, "Operating embeddings")->required();
  errors_cmd->add_option("-o,--out", errors.out, "Output flags CSV")->required();
  auto* scores_opt = errors_cmd->add_option("--scores", errors.scores,
                                            "Classifier scores for the lowest-score baseline");
  errors_cmd->add_option("--n", errors.n_override, "Baseline rejection count override")
      ->needs(scores_opt);
  errors_cmd->add_option("--unknown-policy", errors.unknown_policy,
                         "Flag for unknown-region samples")
      ->check(CLI::IsMember({"optimistic", "pessimistic"}));

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a report against ground truth");
  eval_cmd->add_option("--report", eval.report, "NGP report JSON")->required();
  eval_cmd->add_option("--truth", eval.truth,
                       "Ground truth (ground_truth.json or CSV with outcome column)")
      ->required();
  eval_cmd->add_option("--flags", eval.flags, "Error prediction CSV");
  eval_cmd->add_option("--internal", eval.internal,
                       "Labeled internal set for the test-results baseline");
  eval_cmd->add_option("-o,--out", eval.out, "Output evaluation JSON")->required();
  eval_cmd->add_option("--markdown", eval.markdown, "Markdown table (default: <out>.md)");
  eval_cmd->add_option("--domain", eval.domain, "Operating domain label")->capture_default_str();
  eval_cmd->add_option("--map-name", eval.map_name, "Map label")->capture_default_str();

  SynthOptions synth_options;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic benchmark");
  synth_cmd->add_option("--spec", synth_options.spec, "Scenario spec JSON")->required();
  synth_cmd->add_option("--n-test", synth_options.n_test, "Internal sample count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--m-operating", synth_options.m_operating, "Operating sample count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--out-dir", synth_options.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit_cmd) return CmdFit(g, fit, out);
    if (*predict_cmd) return CmdPredict(g, predict, out);
    if (*errors_cmd) return CmdErrors(g, errors, out);
    if (*eval_cmd) return CmdEval(g, eval, out);
    if (*synth_cmd) return CmdSynth(g, synth_options, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace embedmap::cli
