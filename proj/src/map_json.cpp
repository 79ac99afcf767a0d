#include <string>

#include "json.hpp"

#include "embedmap/error.hpp"
#include "embedmap/io.hpp"
#include "embedmap/manifold.hpp"

namespace embedmap {

using Json = nlohmann::ordered_json;

std::string MapToJson(const EmbeddingMap& map) {
  Json root;
  root["version"] = kMapSchemaVersion;
  root["dim_count"] = map.dim_count();
  root["params"] = {{"max_depth", map.params().max_depth},
                    {"min_samples_leaf", map.params().min_samples_leaf},
                    {"min_gain", map.params().min_gain}};
  Json vocabulary = Json::array();
  for (const auto& kind : map.vocabulary().kinds()) {
    vocabulary.push_back(
        {{"id", kind.id}, {"name", kind.name}, {"is_failure", kind.is_failure}});
  }
  root["outcome_vocabulary"] = std::move(vocabulary);
  root["provenance"] = {{"internal_checksum", map.provenance().internal_checksum},
                        {"created", map.provenance().created}};
  Json nodes = Json::array();
  const auto& tree_nodes = map.tree().nodes();
  for (std::size_t i = 0; i < tree_nodes.size(); ++i) {
    const auto& node = tree_nodes[i];
    if (node.is_leaf()) {
      nodes.push_back(
          {{"id", i}, {"leaf_id", node.leaf_id}, {"samples", node.samples}});
    } else {
      nodes.push_back({{"id", i},
                       {"split_dim", node.split_dim},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right}});
    }
  }
  root["nodes"] = std::move(nodes);
  Json regions = Json::array();
  for (const auto& region : map.regions()) {
    Json hull = Json::array();
    for (const auto& h : region.hull) {
      hull.push_back({{"dim", h.dim}, {"lo", h.lo}, {"hi", h.hi}});
    }
    regions.push_back({{"leaf_id", region.leaf_id},
                       {"path_dims", region.path_dims},
                       {"hull", std::move(hull)},
                       {"outcome_counts", region.outcome_counts}});
  }
  root["regions"] = std::move(regions);
  return root.dump(2) + "\n";
}

EmbeddingMap MapFromJson(std::string_view text) {
  try {
    const Json root = Json::parse(text);
    if (root.at("version").get<int>() != kMapSchemaVersion) {
      throw Error(ErrorCode::kMalformedFile,
                  "unsupported map version " + root.at("version").dump());
    }
    const auto dims = root.at("dim_count").get<std::size_t>();
    TreeParams params;
    const auto& p = root.at("params");
    params.max_depth = p.at("max_depth").get<int>();
    params.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
    params.min_gain = p.at("min_gain").get<double>();
    params.Validate();

    std::vector<OutcomeKind> kinds;
    for (const auto& k : root.at("outcome_vocabulary")) {
      const auto id = k.at("id").get<std::size_t>();
      if (id != kinds.size()) {
        throw Error(ErrorCode::kMalformedFile,
                    "outcome ids must be contiguous from 0");
      }
      kinds.push_back({static_cast<OutcomeId>(id), k.at("name").get<std::string>(),
                       k.at("is_failure").get<bool>()});
    }
    OutcomeVocabulary vocabulary(std::move(kinds));

    Provenance provenance;
    if (root.contains("provenance")) {
      const auto& prov = root.at("provenance");
      provenance.internal_checksum =
          prov.at("internal_checksum").get<std::string>();
      provenance.created = prov.at("created").get<std::string>();
    }

    std::vector<TreeNode> nodes;
    for (const auto& n : root.at("nodes")) {
      if (n.at("id").get<std::size_t>() != nodes.size()) {
        throw Error(ErrorCode::kMalformedFile, "node ids must be sequential");
      }
      TreeNode node;
      if (n.contains("leaf_id")) {
        node.leaf_id = n.at("leaf_id").get<std::int32_t>();
        node.samples = n.at("samples").get<std::vector<std::size_t>>();
        if (node.leaf_id < 0) {
          throw Error(ErrorCode::kMalformedFile, "negative leaf_id");
        }
      } else {
        node.split_dim = n.at("split_dim").get<std::size_t>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<std::int32_t>();
        node.right = n.at("right").get<std::int32_t>();
      }
      nodes.push_back(std::move(node));
    }
    DecisionTree tree(std::move(nodes), dims);

    std::vector<LeafRegion> regions;
    for (const auto& r : root.at("regions")) {
      LeafRegion region;
      region.leaf_id = r.at("leaf_id").get<std::size_t>();
      region.path_dims = r.at("path_dims").get<std::vector<std::size_t>>();
      for (const auto& h : r.at("hull")) {
        region.hull.push_back({h.at("dim").get<std::size_t>(),
                               h.at("lo").get<double>(),
                               h.at("hi").get<double>()});
      }
      region.outcome_counts =
          r.at("outcome_counts").get<std::vector<std::size_t>>();
      const auto total = region.sample_count();
      for (auto c : region.outcome_counts) {
        region.outcome_probs.push_back(
            total == 0 ? 0.0
                       : static_cast<double>(c) / static_cast<double>(total));
      }
      regions.push_back(std::move(region));
    }
    return EmbeddingMap(std::move(tree), std::move(regions),
                        std::move(vocabulary), params, std::move(provenance));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile,
                std::string("embedding map JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) {
      throw Error(ErrorCode::kMalformedFile, e.what());
    }
    throw;
  }
}

void SaveMap(const std::filesystem::path& path, const EmbeddingMap& map) {
  WriteFile(path, MapToJson(map));
}

EmbeddingMap LoadMap(const std::filesystem::path& path) {
  return MapFromJson(ReadFile(path));
}

}  // namespace embedmap
