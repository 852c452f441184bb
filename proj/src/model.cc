#include "gbtx/model.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "gbtx/error.h"

namespace gbtx {

ParseError::ParseError(const std::string& what, int tree, int line)
    : Error([&] {
        std::string msg = what;
        if (tree >= 0) msg += " (tree " + std::to_string(tree) + ")";
        if (line >= 0) msg += " (line " + std::to_string(line) + ")";
        return msg;
      }()),
      tree_(tree),
      line_(line) {}

FeatureSpace::FeatureSpace(std::vector<std::string> names)
    : names_(std::move(names)) {
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw SchemaError("feature name must not be empty");
    if (!seen.insert(name).second)
      throw SchemaError("duplicate feature name '" + name + "'");
  }
}

std::optional<int> FeatureSpace::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

std::vector<int> Tree::Leaves() const {
  std::vector<int> leaves;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Node& node = nodes[id];
    if (node.is_leaf) {
      leaves.push_back(id);
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  return leaves;
}

int Tree::Descend(std::span<const double> x) const {
  int id = root;
  while (!nodes[id].is_leaf) {
    const Node& node = nodes[id];
    id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return id;
}

namespace {

void ValidateTree(const Tree& tree, int index, std::size_t num_features) {
  const std::string where = "tree " + std::to_string(index) + ": ";
  const int n = static_cast<int>(tree.nodes.size());
  if (n == 0) throw SchemaError(where + "tree has no nodes");
  if (tree.root < 0 || tree.root >= n)
    throw SchemaError(where + "root id out of range");
  std::vector<int> parents(n, 0);
  for (int id = 0; id < n; ++id) {
    const Node& node = tree.nodes[id];
    if (node.is_leaf) {
      if (!std::isfinite(node.value))
        throw SchemaError(where + "leaf value is not finite");
      continue;
    }
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= num_features)
      throw SchemaError(where + "split feature index out of range");
    if (!std::isfinite(node.threshold))
      throw SchemaError(where + "split threshold is not finite");
    if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n)
      throw SchemaError(where + "child id out of range");
    if (node.left == node.right)
      throw SchemaError(where + "node graph is not a tree");
    ++parents[node.left];
    ++parents[node.right];
  }
  if (parents[tree.root] != 0)
    throw SchemaError(where + "node graph is not a tree");
  std::vector<bool> reached(n, false);
  std::vector<int> stack{tree.root};
  int count = 0;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (reached[id] || parents[id] > 1)
      throw SchemaError(where + "node graph is not a tree");
    reached[id] = true;
    ++count;
    const Node& node = tree.nodes[id];
    if (!node.is_leaf) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  if (count != n) throw SchemaError(where + "node graph is not a tree");
}

}  // namespace

void Validate(Ensemble& ensemble) {
  if (ensemble.num_classes < 1) throw SchemaError("num_classes must be >= 1");
  if (ensemble.objective == Objective::kBinaryRaw && ensemble.num_classes != 1)
    throw SchemaError("binary_raw models must have num_classes = 1");
  if (ensemble.objective == Objective::kMulticlassRaw && ensemble.num_classes < 2)
    throw SchemaError("multiclass_raw models need num_classes >= 2");
  const auto outputs = static_cast<std::size_t>(ensemble.num_outputs());
  if (ensemble.base_scores.empty()) ensemble.base_scores.assign(outputs, 0.0);
  if (ensemble.base_scores.size() != outputs)
    throw SchemaError("base_scores must have one entry per class");
  for (double b : ensemble.base_scores)
    if (!std::isfinite(b)) throw SchemaError("base score is not finite");

  std::vector<int> per_class(outputs, 0);
  for (std::size_t i = 0; i < ensemble.trees.size(); ++i) {
    const Tree& tree = ensemble.trees[i];
    if (tree.class_index < 0 || static_cast<std::size_t>(tree.class_index) >= outputs)
      throw SchemaError("tree " + std::to_string(i) + ": class_index out of range");
    ++per_class[tree.class_index];
    ValidateTree(tree, static_cast<int>(i), ensemble.num_features());
  }
  if (ensemble.objective == Objective::kMulticlassRaw) {
    for (std::size_t c = 0; c < outputs; ++c)
      if (per_class[c] == 0)
        throw SchemaError("class " + std::to_string(c) + " has no trees");
  }
}

std::vector<double> PredictRaw(const Ensemble& ensemble,
                               std::span<const double> x) {
  std::vector<double> scores(ensemble.base_scores);
  scores.resize(ensemble.num_outputs(), 0.0);
  for (const Tree& tree : ensemble.trees)
    scores[tree.class_index] += tree.nodes[tree.Descend(x)].value;
  return scores;
}

int PredictFromScores(const Ensemble& ensemble, std::span<const double> raw) {
  if (ensemble.objective == Objective::kBinaryRaw) return raw[0] > 0.0 ? 1 : 0;
  int best = 0;
  for (std::size_t c = 1; c < raw.size(); ++c)
    if (raw[c] > raw[best]) best = static_cast<int>(c);
  return best;
}

int Predict(const Ensemble& ensemble, std::span<const double> x) {
  return PredictFromScores(ensemble, PredictRaw(ensemble, x));
}

const char* ObjectiveName(Objective objective) {
  return objective == Objective::kBinaryRaw ? "binary_raw" : "multiclass_raw";
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Ensemble LoadModel(const std::string& path, ModelFormat format) {
  const std::string text = ReadFile(path);
  return format == ModelFormat::kLightGbm ? ParseLightGbmText(text)
                                          : ParsePortableJson(text);
}

}  // namespace gbtx
