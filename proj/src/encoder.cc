#include "gbtx/encoder.h"

#include <algorithm>
#include <sstream>

#include "gbtx/dataset.h"

namespace gbtx {

ThresholdMap::ThresholdMap(std::vector<std::vector<double>> thresholds, int first_var)
    : thresholds_(std::move(thresholds)), base_(first_var) {
  int next = first_var;
  for (std::size_t f = 0; f < thresholds_.size(); ++f) {
    first_var_.push_back(next);
    for (std::size_t j = 0; j < thresholds_[f].size(); ++j)
      atoms_.push_back(AtomRef{static_cast<int>(f), static_cast<int>(j)});
    next += static_cast<int>(thresholds_[f].size());
  }
}

bool ThresholdMap::IsAtom(int var) const {
  return var >= base_ && static_cast<std::size_t>(var - base_) < atoms_.size();
}

int ThresholdMap::RankOf(int feature, double threshold) const {
  const auto& t = thresholds_[feature];
  auto it = std::lower_bound(t.begin(), t.end(), threshold);
  if (it == t.end() || *it != threshold) return -1;
  return static_cast<int>(it - t.begin());
}

int ThresholdMap::CellOf(int feature, double value) const {
  const auto& t = thresholds_[feature];
  return static_cast<int>(std::lower_bound(t.begin(), t.end(), value) - t.begin());
}

ThresholdMap CollectThresholds(const Ensemble& ensemble) {
  std::vector<std::vector<double>> thresholds(ensemble.num_features());
  for (const Tree& tree : ensemble.trees)
    for (const Node& node : tree.nodes)
      if (!node.is_leaf) thresholds[node.feature].push_back(node.threshold);
  for (auto& t : thresholds) {
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
  }
  return ThresholdMap(std::move(thresholds));
}

std::vector<PathEntry> EncodeTree(const Tree& tree, int tree_index,
                                  const ThresholdMap& thresholds) {
  std::vector<PathEntry> out;
  std::vector<Lit> conditions;
  // Explicit stack of (node, depth-of-conditions, literal to push).
  struct Frame {
    int node;
    std::size_t depth;
    Lit lit;
  };
  std::vector<Frame> stack{{tree.root, 0, 0}};
  while (!stack.empty()) {
    Frame frame = stack.back();
    stack.pop_back();
    conditions.resize(frame.depth);
    if (frame.lit != 0) conditions.push_back(frame.lit);
    const Node& node = tree.nodes[frame.node];
    if (node.is_leaf) {
      out.push_back(PathEntry{tree_index, frame.node, 0, node.value, conditions});
      continue;
    }
    const Lit atom = thresholds.var(node.feature, thresholds.RankOf(node.feature, node.threshold));
    stack.push_back(Frame{node.right, conditions.size(), -atom});
    stack.push_back(Frame{node.left, conditions.size(), atom});
  }
  return out;
}

EncodedModel EncodeEnsemble(std::shared_ptr<const Ensemble> ensemble) {
  EncodedModel encoded;
  encoded.thresholds = CollectThresholds(*ensemble);
  const ThresholdMap& tm = encoded.thresholds;
  int next_var = static_cast<int>(tm.num_atoms()) + 1;

  for (std::size_t f = 0; f < tm.num_features(); ++f) {
    const int k = static_cast<int>(tm.thresholds(static_cast<int>(f)).size());
    for (int j = 0; j + 1 < k; ++j)
      encoded.clauses.push_back({-tm.var(static_cast<int>(f), j), tm.var(static_cast<int>(f), j + 1)});
  }
  encoded.num_ordering_clauses = encoded.clauses.size();

  for (std::size_t t = 0; t < ensemble->trees.size(); ++t) {
    encoded.tree_begin.push_back(static_cast<int>(encoded.paths.size()));
    Clause at_least_one;
    for (PathEntry& entry : EncodeTree(ensemble->trees[t], static_cast<int>(t), tm)) {
      entry.var = next_var++;
      Clause definition{entry.var};
      for (Lit cond : entry.conditions) {
        encoded.clauses.push_back({-entry.var, cond});
        definition.push_back(-cond);
      }
      encoded.clauses.push_back(std::move(definition));
      at_least_one.push_back(entry.var);
      encoded.paths.push_back(std::move(entry));
    }
    encoded.clauses.push_back(std::move(at_least_one));
  }
  encoded.tree_begin.push_back(static_cast<int>(encoded.paths.size()));
  encoded.num_vars = next_var - 1;
  encoded.ensemble = std::move(ensemble);
  return encoded;
}

std::vector<Lit> InstanceToAssumptions(const EncodedModel& encoded,
                                       std::span<const double> x,
                                       std::span<const int> fixed_features) {
  std::vector<Lit> out;
  const ThresholdMap& tm = encoded.thresholds;
  for (int f : fixed_features) {
    const auto t = tm.thresholds(f);
    for (std::size_t j = 0; j < t.size(); ++j) {
      const Lit atom = tm.var(f, static_cast<int>(j));
      out.push_back(x[f] <= t[j] ? atom : -atom);
    }
  }
  return out;
}

bool SatisfiesAll(const EncodedModel& encoded, const std::vector<bool>& assignment) {
  for (const Clause& clause : encoded.clauses) {
    bool sat = false;
    for (Lit lit : clause) {
      if (assignment[VarOf(lit)] == (lit > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

std::string ToDimacs(const EncodedModel& encoded) {
  std::ostringstream out;
  const Ensemble& ensemble = *encoded.ensemble;
  const ThresholdMap& tm = encoded.thresholds;
  for (int v = 1; v <= static_cast<int>(tm.num_atoms()); ++v) {
    const auto atom = tm.Atom(v);
    out << "c " << v << " " << ensemble.features.name(atom.feature)
        << " <= " << FormatDouble(tm.thresholds(atom.feature)[atom.rank]) << "\n";
  }
  for (const PathEntry& path : encoded.paths)
    out << "c " << path.var << " tree " << path.tree << " leaf " << path.leaf_node
        << " value " << FormatDouble(path.value) << "\n";
  out << "p cnf " << encoded.num_vars << " " << encoded.clauses.size() << "\n";
  for (const Clause& clause : encoded.clauses) {
    for (Lit lit : clause) out << lit << " ";
    out << "0\n";
  }
  return out.str();
}

}  // namespace gbtx
