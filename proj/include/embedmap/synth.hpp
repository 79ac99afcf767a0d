#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "embedmap/dataset.hpp"
#include "embedmap/inference.hpp"
#include "embedmap/manifold.hpp"
#include "embedmap/tree.hpp"

namespace embedmap::synth {

// Axis-aligned uniform box with an outcome mixture.
struct ClusterSpec {
  std::vector<double> center;
  std::vector<double> half_width;
  std::vector<double> outcome_mix;  // indexed by outcome id
  double test_weight = 1.0;
  double operating_weight = 1.0;
};

struct ScenarioSpec {
  OutcomeVocabulary vocabulary = OutcomeVocabulary::BinaryClassification();
  std::vector<ClusterSpec> clusters;

  // Throws kInvalidSpec.
  void Validate() const;
  std::size_t dim_count() const;
};

// {"outcomes": "TP:0,FN:1,...", "clusters": [{"center", "half_width",
//  "outcome_mix": {name: p}, "test_weight", "operating_weight"}]}
ScenarioSpec SpecFromJson(const nlohmann::ordered_json& json);
nlohmann::ordered_json SpecToJson(const ScenarioSpec& spec);

inline constexpr std::string_view kPrngName = "mt19937_64/v1";

struct SampleTruth {
  std::size_t cluster = 0;
  OutcomeId outcome = 0;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<SampleTruth> internal;
  std::vector<SampleTruth> operating;

  std::vector<OutcomeId> OperatingOutcomes() const;
};

struct Generated {
  LabeledEmbeddingSet internal;
  UnlabeledEmbeddingSet operating;
  GroundTruth truth;
};

// Deterministic for a given seed across platforms: raw mt19937_64 output is
// mapped to [0,1) with the top 53 bits; no std distributions are used.
Generated Generate(const ScenarioSpec& spec, std::size_t n_test,
                   std::size_t m_operating, std::uint64_t seed);

nlohmann::ordered_json GroundTruthToJson(const GroundTruth& truth,
                                         const OutcomeVocabulary& vocabulary);
GroundTruth GroundTruthFromJson(const nlohmann::ordered_json& json,
                                const OutcomeVocabulary& vocabulary);

// Independent per-sample replay of hull assignment and the outcome mixture
// sum, in exact rational arithmetic.
NgpReport OracleNgp(const EmbeddingMap& map,
                    const UnlabeledEmbeddingSet& operating);

inline constexpr std::size_t kOracleMaxSamples = 200;
inline constexpr std::size_t kOracleMaxDims = 8;
inline constexpr int kOracleMaxDepth = 4;

// Exhaustive enumeration of every (dim, midpoint) candidate at every node.
// Throws kScaleLimitExceeded beyond the limits above.
DecisionTree OracleTree(const LabeledEmbeddingSet& set,
                        const TreeParams& params);

}  // namespace embedmap::synth
