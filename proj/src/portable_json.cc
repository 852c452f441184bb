#include <cmath>
#include <string>

#include "gbtx/error.h"
#include "gbtx/model.h"
#include "json.hpp"

namespace gbtx {

namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

const json& Field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) Fail(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) Fail(path + "/" + key, "missing");
  return *it;
}

double Number(const json& value, const std::string& path) {
  if (!value.is_number()) Fail(path, "expected number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) Fail(path, "expected finite number");
  return v;
}

int Integer(const json& value, const std::string& path) {
  if (!value.is_number_integer()) Fail(path, "expected integer");
  return value.get<int>();
}

const json& Array(const json& value, const std::string& path) {
  if (!value.is_array()) Fail(path, "expected array");
  return value;
}

Tree ParseTreeJson(const json& jt, const std::string& path) {
  Tree tree;
  tree.class_index = Integer(Field(jt, path, "class_index"), path + "/class_index");
  tree.root = Integer(Field(jt, path, "root"), path + "/root");
  const json& nodes = Array(Field(jt, path, "nodes"), path + "/nodes");
  if (nodes.empty()) Fail(path + "/nodes", "tree has no nodes");
  tree.nodes.assign(nodes.size(), Node{});
  std::vector<bool> seen(nodes.size(), false);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string np = path + "/nodes/" + std::to_string(i);
    const json& jn = nodes[i];
    const int id = Integer(Field(jn, np, "id"), np + "/id");
    if (id < 0 || static_cast<std::size_t>(id) >= nodes.size() || seen[id])
      Fail(np + "/id", "node ids must be a permutation of 0..n-1");
    seen[id] = true;
    const json& kind = Field(jn, np, "kind");
    if (kind == "leaf") {
      tree.nodes[id] = Node::Leaf(Number(Field(jn, np, "value"), np + "/value"));
    } else if (kind == "split") {
      tree.nodes[id] = Node::Split(Integer(Field(jn, np, "feature"), np + "/feature"),
                                   Number(Field(jn, np, "threshold"), np + "/threshold"),
                                   Integer(Field(jn, np, "left"), np + "/left"),
                                   Integer(Field(jn, np, "right"), np + "/right"));
    } else {
      Fail(np + "/kind", "expected \"split\" or \"leaf\"");
    }
  }
  return tree;
}

}  // namespace

Ensemble ParsePortableJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  Ensemble ensemble;
  ensemble.num_classes = Integer(Field(doc, "", "num_classes"), "/num_classes");
  if (auto it = doc.find("objective"); it != doc.end()) {
    if (*it == "binary_raw") {
      ensemble.objective = Objective::kBinaryRaw;
    } else if (*it == "multiclass_raw") {
      ensemble.objective = Objective::kMulticlassRaw;
    } else {
      Fail("/objective", "expected \"binary_raw\" or \"multiclass_raw\"");
    }
  } else {
    ensemble.objective =
        ensemble.num_classes == 1 ? Objective::kBinaryRaw : Objective::kMulticlassRaw;
  }
  if (auto it = doc.find("base_scores"); it != doc.end()) {
    const json& scores = Array(*it, "/base_scores");
    for (std::size_t i = 0; i < scores.size(); ++i)
      ensemble.base_scores.push_back(Number(scores[i], "/base_scores/" + std::to_string(i)));
  }
  const json& features = Array(Field(doc, "", "features"), "/features");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string fp = "/features/" + std::to_string(i);
    const json& name = Field(features[i], fp, "name");
    if (!name.is_string()) Fail(fp + "/name", "expected string");
    names.push_back(name.get<std::string>());
  }
  ensemble.features = FeatureSpace(std::move(names));
  const json& trees = Array(Field(doc, "", "trees"), "/trees");
  for (std::size_t i = 0; i < trees.size(); ++i)
    ensemble.trees.push_back(ParseTreeJson(trees[i], "/trees/" + std::to_string(i)));
  Validate(ensemble);
  return ensemble;
}

std::string EmitPortableJson(const Ensemble& ensemble) {
  nlohmann::ordered_json doc;
  doc["num_classes"] = ensemble.num_classes;
  doc["objective"] = ObjectiveName(ensemble.objective);
  doc["base_scores"] = ensemble.base_scores;
  auto& features = doc["features"] = nlohmann::ordered_json::array();
  for (const auto& name : ensemble.features.names()) features.push_back({{"name", name}});
  auto& trees = doc["trees"] = nlohmann::ordered_json::array();
  for (const Tree& tree : ensemble.trees) {
    nlohmann::ordered_json jt;
    jt["class_index"] = tree.class_index;
    jt["root"] = tree.root;
    auto& nodes = jt["nodes"] = nlohmann::ordered_json::array();
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const Node& node = tree.nodes[id];
      nlohmann::ordered_json jn;
      jn["id"] = id;
      if (node.is_leaf) {
        jn["kind"] = "leaf";
        jn["value"] = node.value;
      } else {
        jn["kind"] = "split";
        jn["feature"] = node.feature;
        jn["threshold"] = node.threshold;
        jn["left"] = node.left;
        jn["right"] = node.right;
      }
      nodes.push_back(std::move(jn));
    }
    trees.push_back(std::move(jt));
  }
  return doc.dump(1) + "\n";
}

}  // namespace gbtx
