#include "doctest.h"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <random>

#include "json.hpp"

#include "embedmap/error.hpp"
#include "embedmap/manifold.hpp"
#include "test_support.hpp"

using namespace embedmap;
using Rational = boost::multiprecision::cpp_rational;

namespace {

TreeNode Internal(std::size_t dim, double threshold, int left, int right) {
  TreeNode n;
  n.split_dim = dim;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return n;
}

TreeNode Leaf(int id) {
  TreeNode n;
  n.leaf_id = id;
  return n;
}

// root: d0 <= 0.5 ? (d1 <= 1.0 ? leaf0 : leaf1) : leaf2
DecisionTree DepthTwoTree() {
  return DecisionTree({Internal(0, 0.5, 1, 4), Internal(1, 1.0, 2, 3), Leaf(0),
                       Leaf(1), Leaf(2)},
                      2);
}

}  // namespace

TEST_CASE("partition_by_leaf follows hand-traced routing") {
  const auto set = testing::MakeLabeled(
      {{0.0, 0.0}, {0.5, 1.0}, {0.5, 1.5}, {0.6, 0.0}, {-3.0, 9.0}, {2.0, -1.0}},
      {"TP", "TP", "FN", "TN", "FP", "TN"});
  const auto parts = PartitionByLeaf(DepthTwoTree(), set);
  // Row 1 sits on both thresholds and goes left twice.
  CHECK(parts[0] == std::vector<std::size_t>{0, 1});
  CHECK(parts[1] == std::vector<std::size_t>{2, 4});
  CHECK(parts[2] == std::vector<std::size_t>{3, 5});
}

TEST_CASE("partition_by_leaf on the training set reproduces the stored leaves") {
  std::mt19937_64 rng(4);
  const auto set = testing::RandomLabeled(rng, 200, 5, 4, 0);
  const auto tree = FitTree(set, {6, 1, 0.0});
  const auto parts = PartitionByLeaf(tree, set);
  for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
    CHECK(parts[l] == tree.leaf(l).samples);
  }
}

TEST_CASE("partition_by_leaf degenerate and error cases") {
  const auto set = testing::MakeLabeled({{1.0}, {2.0}, {3.0}}, {"TP", "TP", "TP"});
  const auto single = FitTree(set, {});
  const auto parts = PartitionByLeaf(single, set);
  REQUIRE(parts.size() == 1);
  CHECK(parts[0] == std::vector<std::size_t>{0, 1, 2});

  const auto wide = testing::MakeLabeled({{1.0, 2.0}}, {"TP"});
  try {
    PartitionByLeaf(single, wide);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("build_map hull and leaf probabilities") {
  // root: d3 <= 1.45 -> leaf 0 {0.2, 0.9, 0.4}, leaf 1 {2, 3}
  const DecisionTree tree({Internal(3, 1.45, 1, 2), Leaf(0), Leaf(1)}, 4);
  const auto set = testing::MakeLabeled(
      {{9, 9, 9, 0.2}, {0, 0, 0, 0.9}, {5, 5, 5, 0.4}, {1, 1, 1, 2}, {7, 7, 7, 3}},
      {"TP", "TP", "FN", "TN", "TN"});
  const auto map = BuildMap(tree, set);
  const auto& leaf = map.region(0);
  CHECK(leaf.path_dims == std::vector<std::size_t>{3});
  REQUIRE(leaf.hull.size() == 1);
  CHECK(leaf.hull[0] == HullInterval{3, 0.2, 0.9});
  CHECK(leaf.outcome_counts == std::vector<std::size_t>{2, 1, 0, 0});
  CHECK(map.region(1).outcome_probs == std::vector<double>{0, 0, 0, 1});
}

TEST_CASE("build_map outcome ratios") {
  const auto set = testing::MakeLabeled({{0}, {1}, {2}, {3}}, {"TP", "TP", "FN", "TP"});
  const DecisionTree root({Leaf(0)}, 1);
  const auto map = BuildMap(root, set);
  const auto& region = map.region(0);
  CHECK(region.outcome_probs[binary::kTruePositive] == 0.75);
  CHECK(region.outcome_probs[binary::kFalseNegative] == 0.25);
  CHECK(region.outcome_probs[binary::kFalsePositive] == 0.0);
  CHECK(region.outcome_probs[binary::kTrueNegative] == 0.0);
  // Root-only tree: no constraints, global frequencies.
  CHECK(region.path_dims.empty());
  CHECK(region.hull.empty());
  CHECK(region.Contains(std::vector<double>{1e300}));
  CHECK(region.FailureProbability(map.vocabulary()) == 0.25);
}

TEST_CASE("build_map deduplicates repeated path dims") {
  const DecisionTree tree({Internal(0, 5.0, 1, 4), Internal(0, 2.0, 2, 3), Leaf(0),
                           Leaf(1), Leaf(2)},
                          2);
  const auto set = testing::MakeLabeled({{1, 0}, {3, 0}, {4, 7}, {6, 1}},
                                        {"TP", "FN", "FN", "TN"});
  const auto map = BuildMap(tree, set);
  CHECK(map.region(1).path_dims == std::vector<std::size_t>{0});
  CHECK(map.region(1).hull == std::vector<HullInterval>{{0, 3.0, 4.0}});
}

TEST_CASE("build_map rejects leaves no sample reaches") {
  const auto set = testing::MakeLabeled({{0.0, 0.0}, {1.0, 0.0}}, {"TP", "FN"});
  try {
    BuildMap(DepthTwoTree(), set);
    FAIL("expected EmptyLeaf");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyLeaf);
  }
}

TEST_CASE("property: map invariants on random fitted trees") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const TreeParams params{2 + trial % 8, 1, 0.0};
    const auto set =
        testing::RandomLabeled(rng, 100 + 20 * trial, 2 + trial % 6, 2 + trial % 3,
                               trial % 3 == 0 ? 5 : 0);
    const auto map = BuildMap(FitTree(set, params), set, params);
    CHECK(map.sample_count() == set.sample_count());

    const auto counts = CountOutcomes(set);
    std::vector<Rational> total(counts.size(), Rational(0));
    for (const auto& region : map.regions()) {
      CHECK(region.path_dims.size() <= static_cast<std::size_t>(params.max_depth));
      double sum = 0.0;
      for (double p : region.outcome_probs) sum += p;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      const auto n_leaf = region.sample_count();
      for (std::size_t a = 0; a < counts.size(); ++a) {
        // p(a|l) is the exact count ratio rounded once.
        CHECK(region.outcome_probs[a] ==
              static_cast<double>(region.outcome_counts[a]) / n_leaf);
        total[a] += Rational(n_leaf, set.sample_count()) *
                    Rational(region.outcome_counts[a], n_leaf);
      }
      const auto& members = map.tree().leaf(region.leaf_id).samples;
      for (auto s : members) CHECK(region.Contains(set.row(s)));
      // Minimality: each bound is attained by a member.
      for (const auto& h : region.hull) {
        bool lo_hit = false, hi_hit = false;
        for (auto s : members) {
          lo_hit = lo_hit || set.at(s, h.dim) == h.lo;
          hi_hit = hi_hit || set.at(s, h.dim) == h.hi;
        }
        CHECK(lo_hit);
        CHECK(hi_hit);
      }
    }
    // Law of total probability, exact.
    for (std::size_t a = 0; a < counts.size(); ++a) {
      CHECK(total[a] == Rational(counts[a], set.sample_count()));
    }
  }
}

TEST_CASE("map JSON round trip is byte-identical") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto set = testing::RandomLabeled(rng, 150, 4, 4, trial % 2 ? 7 : 0);
    const TreeParams params{5, 2, 0.001};
    const auto map =
        BuildMap(FitTree(set, params), set, params, {"sha256:abc", "2026-01-01T00:00:00Z"});
    const auto text = MapToJson(map);
    const auto loaded = MapFromJson(text);
    CHECK(loaded == map);
    CHECK(MapToJson(loaded) == text);
  }
}

TEST_CASE("map JSON schema violations") {
  const auto set = testing::MakeLabeled({{0}, {1}}, {"TP", "FN"});
  const auto map = BuildMap(FitTree(set, {}), set);
  const auto good = MapToJson(map);
  const auto code = [](const std::string& text) {
    try {
      MapFromJson(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  CHECK(code("{") == ErrorCode::kMalformedFile);
  CHECK(code("{}") == ErrorCode::kMalformedFile);
  auto json = nlohmann::ordered_json::parse(good);
  json["version"] = 99;
  CHECK(code(json.dump()) == ErrorCode::kMalformedFile);
  json = nlohmann::ordered_json::parse(good);
  json["regions"][0]["hull"][0]["lo"] = 5.0;
  CHECK(code(json.dump()) == ErrorCode::kMalformedFile);
  json = nlohmann::ordered_json::parse(good);
  json["regions"].erase(1);
  CHECK(code(json.dump()) == ErrorCode::kMalformedFile);
  json = nlohmann::ordered_json::parse(good);
  json["params"]["max_depth"] = 0;
  CHECK(code(json.dump()) == ErrorCode::kMalformedFile);
}
