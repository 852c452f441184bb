#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gbtx/error.h"
#include "gbtx/model.h"

namespace gbtx {

namespace {

struct Entry {
  std::string value;
  int line;
};

using Block = std::map<std::string, Entry, std::less<>>;

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitSpaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double ParseDouble(std::string_view token, int tree, int line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
    throw ParseError("invalid number '" + std::string(token) + "'", tree, line);
  return value;
}

long ParseInt(std::string_view token, int tree, int line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("invalid integer '" + std::string(token) + "'", tree, line);
  return value;
}

const Entry& Require(const Block& block, std::string_view key, int tree, int line) {
  auto it = block.find(key);
  if (it == block.end()) {
    if (tree < 0) throw ParseError("malformed header: missing '" + std::string(key) + "'", -1, line);
    throw ParseError("missing '" + std::string(key) + "'", tree, line);
  }
  return it->second;
}

template <typename T, typename Fn>
std::vector<T> ParseList(const Entry& entry, std::size_t expected, std::string_view key,
                         int tree, Fn parse) {
  std::vector<T> out;
  for (auto token : SplitSpaces(entry.value)) out.push_back(parse(token, tree, entry.line));
  if (out.size() != expected)
    throw ParseError("'" + std::string(key) + "' has " + std::to_string(out.size()) +
                         " entries, expected " + std::to_string(expected),
                     tree, entry.line);
  return out;
}

// LightGBM decision_type bit layout: bit 0 categorical, bit 1 default-left,
// bits 2-3 missing type (0 none, 1 zero, 2 NaN).
void CheckDecisionType(long decision_type, int tree, int line) {
  if (decision_type & 1) throw ParseError("categorical split unsupported", tree, line);
  const long missing_type = (decision_type >> 2) & 3;
  if (missing_type == 1)
    throw ParseError("zero-as-missing default direction unsupported", tree, line);
  if (missing_type == 3 || decision_type > 15)
    throw ParseError("unknown decision type " + std::to_string(decision_type), tree, line);
}

Tree ParseTree(const Block& block, int tree_id, int header_line, long max_feature) {
  const Entry& leaves_entry = Require(block, "num_leaves", tree_id, header_line);
  const long num_leaves = ParseInt(leaves_entry.value, tree_id, leaves_entry.line);
  if (num_leaves < 1) throw ParseError("num_leaves must be >= 1", tree_id, leaves_entry.line);
  if (auto it = block.find("num_cat"); it != block.end() &&
                                      ParseInt(Trim(it->second.value), tree_id, it->second.line) != 0)
    throw ParseError("categorical split unsupported", tree_id, it->second.line);
  if (auto it = block.find("is_linear"); it != block.end() && Trim(it->second.value) != "0")
    throw ParseError("linear trees unsupported", tree_id, it->second.line);

  const auto leaves = static_cast<std::size_t>(num_leaves);
  const Entry& leaf_entry = Require(block, "leaf_value", tree_id, header_line);
  const auto leaf_values = ParseList<double>(leaf_entry, leaves, "leaf_value", tree_id, ParseDouble);

  Tree tree;
  if (num_leaves == 1) {
    tree.nodes.push_back(Node::Leaf(leaf_values[0]));
    return tree;
  }
  const std::size_t internal = leaves - 1;
  const Entry& feature_entry = Require(block, "split_feature", tree_id, header_line);
  const Entry& threshold_entry = Require(block, "threshold", tree_id, header_line);
  const Entry& decision_entry = Require(block, "decision_type", tree_id, header_line);
  const Entry& left_entry = Require(block, "left_child", tree_id, header_line);
  const Entry& right_entry = Require(block, "right_child", tree_id, header_line);
  const auto features = ParseList<long>(feature_entry, internal, "split_feature", tree_id, ParseInt);
  const auto thresholds = ParseList<double>(threshold_entry, internal, "threshold", tree_id, ParseDouble);
  const auto decisions = ParseList<long>(decision_entry, internal, "decision_type", tree_id, ParseInt);
  const auto lefts = ParseList<long>(left_entry, internal, "left_child", tree_id, ParseInt);
  const auto rights = ParseList<long>(right_entry, internal, "right_child", tree_id, ParseInt);

  // Internal nodes keep ids 0..L-2; leaf k becomes node L-1+k.
  auto child_id = [&](long child, const Entry& entry) -> int {
    if (child >= 0) {
      if (static_cast<std::size_t>(child) >= internal)
        throw ParseError("dangling child index " + std::to_string(child), tree_id, entry.line);
      return static_cast<int>(child);
    }
    const long leaf = -child - 1;
    if (static_cast<std::size_t>(leaf) >= leaves)
      throw ParseError("dangling child index " + std::to_string(child), tree_id, entry.line);
    return static_cast<int>(internal + leaf);
  };

  for (std::size_t i = 0; i < internal; ++i) {
    CheckDecisionType(decisions[i], tree_id, decision_entry.line);
    if (features[i] < 0 || features[i] > max_feature)
      throw ParseError("split feature " + std::to_string(features[i]) + " out of range",
                       tree_id, feature_entry.line);
    tree.nodes.push_back(Node::Split(static_cast<int>(features[i]), thresholds[i],
                                     child_id(lefts[i], left_entry),
                                     child_id(rights[i], right_entry)));
  }
  for (double v : leaf_values) tree.nodes.push_back(Node::Leaf(v));
  return tree;
}

}  // namespace

Ensemble ParseLightGbmText(std::string_view text) {
  Block header;
  std::vector<std::pair<int, int>> tree_starts;  // (tree id, line)
  std::vector<Block> tree_blocks;
  Block* current = &header;
  bool saw_tree = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = Trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line == "end of trees") break;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      if (!saw_tree && line == "tree") continue;
      if (saw_tree) continue;
      throw ParseError("malformed header line '" + std::string(line) + "'", -1, line_no);
    }
    std::string key(Trim(line.substr(0, eq)));
    std::string_view value = Trim(line.substr(eq + 1));
    if (key == "Tree") {
      saw_tree = true;
      const int id = static_cast<int>(ParseInt(value, -1, line_no));
      if (id != static_cast<int>(tree_blocks.size()))
        throw ParseError("unexpected tree id " + std::to_string(id), id, line_no);
      tree_starts.emplace_back(id, line_no);
      tree_blocks.emplace_back();
      current = &tree_blocks.back();
      continue;
    }
    (*current)[key] = Entry{std::string(value), line_no};
  }

  const Entry& num_class_entry = Require(header, "num_class", -1, 1);
  const long num_class = ParseInt(num_class_entry.value, -1, num_class_entry.line);
  const Entry& max_feature_entry = Require(header, "max_feature_idx", -1, 1);
  const long max_feature = ParseInt(max_feature_entry.value, -1, max_feature_entry.line);
  const Entry& objective_entry = Require(header, "objective", -1, 1);
  const Entry& names_entry = Require(header, "feature_names", -1, 1);
  if (num_class < 1) throw ParseError("malformed header: num_class < 1", -1, num_class_entry.line);
  if (max_feature < 0)
    throw ParseError("malformed header: max_feature_idx < 0", -1, max_feature_entry.line);

  long per_iteration = num_class;
  if (auto it = header.find("num_tree_per_iteration"); it != header.end()) {
    per_iteration = ParseInt(it->second.value, -1, it->second.line);
    if (per_iteration != num_class)
      throw ParseError("malformed header: num_tree_per_iteration != num_class", -1, it->second.line);
  }

  Ensemble ensemble;
  const auto objective_tokens = SplitSpaces(objective_entry.value);
  const std::string_view objective = objective_tokens.empty() ? "" : objective_tokens[0];
  if (objective == "binary" || objective == "cross_entropy") {
    if (num_class != 1)
      throw ParseError("malformed header: binary objective with num_class != 1", -1,
                       num_class_entry.line);
    ensemble.objective = Objective::kBinaryRaw;
  } else if (objective == "multiclass" || objective == "multiclassova" ||
             objective == "softmax" || objective == "multiclass_ova") {
    ensemble.objective = Objective::kMulticlassRaw;
  } else {
    throw ParseError("unsupported objective '" + std::string(objective) + "'", -1,
                     objective_entry.line);
  }
  ensemble.num_classes = static_cast<int>(num_class);

  std::vector<std::string> names;
  for (auto token : SplitSpaces(names_entry.value)) names.emplace_back(token);
  if (names.size() != static_cast<std::size_t>(max_feature + 1))
    throw ParseError("malformed header: feature_names does not match max_feature_idx", -1,
                     names_entry.line);
  try {
    ensemble.features = FeatureSpace(std::move(names));
  } catch (const SchemaError& e) {
    throw ParseError(std::string("malformed header: ") + e.what(), -1, names_entry.line);
  }

  for (std::size_t i = 0; i < tree_blocks.size(); ++i) {
    Tree tree = ParseTree(tree_blocks[i], tree_starts[i].first, tree_starts[i].second,
                          max_feature);
    tree.class_index = ensemble.objective == Objective::kBinaryRaw
                           ? 0
                           : static_cast<int>(i % static_cast<std::size_t>(num_class));
    ensemble.trees.push_back(std::move(tree));
  }
  try {
    Validate(ensemble);
  } catch (const SchemaError& e) {
    throw ParseError(e.what());
  }
  return ensemble;
}

}  // namespace gbtx
