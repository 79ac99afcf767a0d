#include "embedmap/synth.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "embedmap/error.hpp"

namespace embedmap::synth {

using Json = nlohmann::ordered_json;
using Rational = boost::multiprecision::cpp_rational;

void ScenarioSpec::Validate() const {
  if (clusters.empty()) throw Error(ErrorCode::kInvalidSpec, "no clusters");
  const std::size_t dims = clusters.front().center.size();
  if (dims == 0) throw Error(ErrorCode::kInvalidSpec, "cluster center is empty");
  double test_total = 0.0;
  double operating_total = 0.0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cluster = clusters[c];
    const std::string where = "cluster " + std::to_string(c) + ": ";
    if (cluster.center.size() != dims || cluster.half_width.size() != dims) {
      throw Error(ErrorCode::kInvalidSpec, where + "dimension mismatch");
    }
    for (std::size_t d = 0; d < dims; ++d) {
      if (!std::isfinite(cluster.center[d]) ||
          !(cluster.half_width[d] > 0.0) || !std::isfinite(cluster.half_width[d])) {
        throw Error(ErrorCode::kInvalidSpec,
                    where + "bad center/half_width at dim " + std::to_string(d));
      }
    }
    if (cluster.outcome_mix.size() != vocabulary.size()) {
      throw Error(ErrorCode::kInvalidSpec, where + "outcome_mix size mismatch");
    }
    double mass = 0.0;
    for (double p : cluster.outcome_mix) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::kInvalidSpec, where + "negative outcome mass");
      }
      mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidSpec, where + "outcome_mix must sum to 1");
    }
    if (!(cluster.test_weight >= 0.0) || !(cluster.operating_weight >= 0.0) ||
        !std::isfinite(cluster.test_weight) ||
        !std::isfinite(cluster.operating_weight)) {
      throw Error(ErrorCode::kInvalidSpec, where + "weights must be >= 0");
    }
    test_total += cluster.test_weight;
    operating_total += cluster.operating_weight;
  }
  if (!(test_total > 0.0) || !(operating_total > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec,
                "need positive total test and operating weight");
  }
}

std::size_t ScenarioSpec::dim_count() const {
  return clusters.empty() ? 0 : clusters.front().center.size();
}

ScenarioSpec SpecFromJson(const Json& json) {
  try {
    ScenarioSpec spec;
    if (json.contains("outcomes")) {
      spec.vocabulary =
          OutcomeVocabulary::Parse(json.at("outcomes").get<std::string>());
    }
    for (const auto& c : json.at("clusters")) {
      ClusterSpec cluster;
      cluster.center = c.at("center").get<std::vector<double>>();
      cluster.half_width = c.at("half_width").get<std::vector<double>>();
      const auto& mix = c.at("outcome_mix");
      if (mix.is_array()) {
        cluster.outcome_mix = mix.get<std::vector<double>>();
      } else {
        cluster.outcome_mix.assign(spec.vocabulary.size(), 0.0);
        for (const auto& [name, p] : mix.items()) {
          cluster.outcome_mix[spec.vocabulary.Lookup(name)] = p.get<double>();
        }
      }
      cluster.test_weight = c.value("test_weight", 1.0);
      cluster.operating_weight = c.value("operating_weight", 1.0);
      spec.clusters.push_back(std::move(cluster));
    }
    spec.Validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("scenario JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidSpec) throw;
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
}

Json SpecToJson(const ScenarioSpec& spec) {
  Json clusters = Json::array();
  for (const auto& c : spec.clusters) {
    Json mix = Json::object();
    for (const auto& kind : spec.vocabulary.kinds()) {
      mix[kind.name] = c.outcome_mix.at(kind.id);
    }
    clusters.push_back({{"center", c.center},
                        {"half_width", c.half_width},
                        {"outcome_mix", std::move(mix)},
                        {"test_weight", c.test_weight},
                        {"operating_weight", c.operating_weight}});
  }
  return {{"outcomes", spec.vocabulary.ToString()},
          {"clusters", std::move(clusters)}};
}

std::vector<OutcomeId> GroundTruth::OperatingOutcomes() const {
  std::vector<OutcomeId> ids;
  ids.reserve(operating.size());
  for (const auto& s : operating) ids.push_back(s.outcome);
  return ids;
}

namespace {

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) from the top 53 bits.
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Index drawn proportionally to `weights`; zero weights are never chosen.
  std::size_t Pick(const std::vector<double>& weights, double total) {
    const double target = Unit() * total;
    double cumulative = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      cumulative += weights[i];
      last = i;
      if (target < cumulative) return i;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

void Draw(const ScenarioSpec& spec, Stream& stream,
          const std::vector<double>& weights, std::size_t count,
          std::vector<double>& values, std::vector<SampleTruth>& truth) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const std::size_t dims = spec.dim_count();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = stream.Pick(weights, total);
    const auto& cluster = spec.clusters[c];
    for (std::size_t d = 0; d < dims; ++d) {
      values.push_back(cluster.center[d] +
                       cluster.half_width[d] * (2.0 * stream.Unit() - 1.0));
    }
    const auto outcome = static_cast<OutcomeId>(stream.Pick(cluster.outcome_mix, 1.0));
    truth.push_back({c, outcome});
  }
}

}  // namespace

Generated Generate(const ScenarioSpec& spec, std::size_t n_test,
                   std::size_t m_operating, std::uint64_t seed) {
  spec.Validate();
  if (n_test == 0 || m_operating == 0) {
    throw Error(ErrorCode::kInvalidSpec, "sample counts must be positive");
  }
  std::vector<double> test_weights;
  std::vector<double> operating_weights;
  for (const auto& c : spec.clusters) {
    test_weights.push_back(c.test_weight);
    operating_weights.push_back(c.operating_weight);
  }
  Stream stream(seed);
  GroundTruth truth;
  truth.seed = seed;
  std::vector<double> internal_values;
  std::vector<double> operating_values;
  Draw(spec, stream, test_weights, n_test, internal_values, truth.internal);
  Draw(spec, stream, operating_weights, m_operating, operating_values,
       truth.operating);
  std::vector<OutcomeId> outcomes;
  for (const auto& s : truth.internal) outcomes.push_back(s.outcome);
  const std::size_t dims = spec.dim_count();
  return {LabeledEmbeddingSet(
              EmbeddingMatrix(std::move(internal_values), n_test, dims),
              std::move(outcomes), spec.vocabulary),
          UnlabeledEmbeddingSet(
              EmbeddingMatrix(std::move(operating_values), m_operating, dims)),
          std::move(truth)};
}

Json GroundTruthToJson(const GroundTruth& truth,
                       const OutcomeVocabulary& vocabulary) {
  const auto rows = [&](const std::vector<SampleTruth>& samples) {
    Json out = Json::array();
    for (const auto& s : samples) {
      out.push_back({{"cluster", s.cluster},
                     {"outcome", vocabulary[s.outcome].name}});
    }
    return out;
  };
  return {{"prng", std::string(kPrngName)},
          {"seed", truth.seed},
          {"internal", rows(truth.internal)},
          {"operating", rows(truth.operating)}};
}

GroundTruth GroundTruthFromJson(const Json& json,
                                const OutcomeVocabulary& vocabulary) {
  try {
    GroundTruth truth;
    truth.seed = json.value("seed", std::uint64_t{0});
    const auto rows = [&](const Json& samples) {
      std::vector<SampleTruth> out;
      for (const auto& s : samples) {
        out.push_back({s.at("cluster").get<std::size_t>(),
                       vocabulary.Lookup(s.at("outcome").get<std::string>())});
      }
      return out;
    };
    if (json.contains("internal")) truth.internal = rows(json.at("internal"));
    truth.operating = rows(json.at("operating"));
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                std::string("ground truth JSON: ") + e.what());
  }
}

NgpReport OracleNgp(const EmbeddingMap& map,
                    const UnlabeledEmbeddingSet& operating) {
  if (operating.dim_count() != map.dim_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "operating set has D=" + std::to_string(operating.dim_count()) +
                    ", map expects D=" + std::to_string(map.dim_count()));
  }
  const std::size_t m = operating.sample_count();
  if (m == 0) throw Error(ErrorCode::kEmptyOperatingSet, "no operating samples");
  const auto& nodes = map.tree().nodes();
  const std::size_t leaves = map.leaf_count();
  std::vector<std::size_t> tally(leaves + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t at = 0;
    while (nodes[at].leaf_id < 0) {
      at = operating.at(i, nodes[at].split_dim) <= nodes[at].threshold
               ? static_cast<std::size_t>(nodes[at].left)
               : static_cast<std::size_t>(nodes[at].right);
    }
    const auto leaf = static_cast<std::size_t>(nodes[at].leaf_id);
    bool inside = true;
    for (const auto& h : map.region(leaf).hull) {
      const double x = operating.at(i, h.dim);
      if (x < h.lo || x > h.hi) inside = false;
    }
    ++tally[inside ? leaf : leaves];
  }

  const std::size_t k = map.vocabulary().size();
  std::vector<Rational> outcome(k, Rational(0));
  std::vector<double> masses(leaves);
  for (std::size_t l = 0; l < leaves; ++l) {
    const auto& counts = map.region(l).outcome_counts;
    std::size_t n_leaf = 0;
    for (auto c : counts) n_leaf += c;
    const Rational p_leaf(tally[l], m);
    masses[l] = static_cast<double>(p_leaf);
    for (std::size_t a = 0; a < k; ++a) {
      outcome[a] += Rational(counts[a], n_leaf) * p_leaf;
    }
  }
  NgpReport report;
  report.vocabulary = map.vocabulary();
  report.sample_count = m;
  for (const auto& p : outcome) report.outcome_probs.push_back(static_cast<double>(p));
  report.unknown_prob = static_cast<double>(Rational(tally[leaves], m));
  report.leaf_masses = std::move(masses);
  return report;
}

namespace {

double OracleEntropy(const std::vector<std::size_t>& counts) {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  return h;
}

struct Candidate {
  std::size_t dim;
  double threshold;
  double gain;
};

class ExhaustiveBuilder {
 public:
  ExhaustiveBuilder(const LabeledEmbeddingSet& set, const TreeParams& params)
      : set_(set), params_(params) {}

  std::vector<TreeNode> Build() {
    std::vector<std::size_t> all(set_.sample_count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    Node(all, 0);
    return std::move(nodes_);
  }

 private:
  std::vector<std::size_t> Counts(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> counts(set_.vocabulary().size(), 0);
    for (auto r : rows) ++counts[set_.outcome(r)];
    return counts;
  }

  std::size_t Node(const std::vector<std::size_t>& rows, int depth) {
    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    const auto parent_counts = Counts(rows);
    const auto distinct_outcomes = std::count_if(
        parent_counts.begin(), parent_counts.end(), [](auto c) { return c > 0; });

    std::vector<Candidate> candidates;
    if (depth < params_.max_depth && distinct_outcomes > 1) {
      const double parent = OracleEntropy(parent_counts);
      const double n = static_cast<double>(rows.size());
      for (std::size_t d = 0; d < set_.dim_count(); ++d) {
        std::set<double> values;
        for (auto r : rows) values.insert(set_.at(r, d));
        for (auto it = values.begin(); std::next(it) != values.end(); ++it) {
          const double threshold = std::midpoint(*it, *std::next(it));
          std::vector<std::size_t> left;
          std::vector<std::size_t> right;
          for (auto r : rows) {
            (set_.at(r, d) <= threshold ? left : right).push_back(r);
          }
          const double gain =
              parent -
              (static_cast<double>(left.size()) / n) * OracleEntropy(Counts(left)) -
              (static_cast<double>(right.size()) / n) * OracleEntropy(Counts(right));
          candidates.push_back({d, threshold, gain});
        }
      }
    }

    const Candidate* chosen = nullptr;
    if (!candidates.empty()) {
      double top = candidates.front().gain;
      for (const auto& c : candidates) top = std::max(top, c.gain);
      if (top > params_.min_gain + kGainTolerance) {
        for (const auto& c : candidates) {
          if (c.gain >= top - kGainTolerance) {
            chosen = &c;
            break;
          }
        }
      }
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    if (chosen != nullptr) {
      for (auto r : rows) {
        (set_.at(r, chosen->dim) <= chosen->threshold ? left : right).push_back(r);
      }
      if (left.size() < params_.min_samples_leaf ||
          right.size() < params_.min_samples_leaf) {
        chosen = nullptr;
      }
    }
    if (chosen == nullptr) {
      nodes_[index].leaf_id = leaf_counter_++;
      nodes_[index].samples = rows;
      return index;
    }
    nodes_[index].split_dim = chosen->dim;
    nodes_[index].threshold = chosen->threshold;
    const auto l = Node(left, depth + 1);
    const auto r = Node(right, depth + 1);
    nodes_[index].left = static_cast<std::int32_t>(l);
    nodes_[index].right = static_cast<std::int32_t>(r);
    return index;
  }

  const LabeledEmbeddingSet& set_;
  const TreeParams& params_;
  std::vector<TreeNode> nodes_;
  std::int32_t leaf_counter_ = 0;
};

}  // namespace

DecisionTree OracleTree(const LabeledEmbeddingSet& set,
                        const TreeParams& params) {
  params.Validate();
  if (set.sample_count() > kOracleMaxSamples || set.dim_count() > kOracleMaxDims ||
      params.max_depth > kOracleMaxDepth) {
    throw Error(ErrorCode::kScaleLimitExceeded,
                "oracle is limited to N<=200, D<=8, depth<=4");
  }
  return DecisionTree(ExhaustiveBuilder(set, params).Build(), set.dim_count());
}

}  // namespace embedmap::synth
