#include "gbtx/refcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gbtx/error.h"

namespace gbtx::refcheck {

CellGrid EnumerateCells(const std::vector<std::vector<double>>& thresholds, std::size_t cap) {
  CellGrid grid;
  grid.thresholds = thresholds;
  for (const auto& t : thresholds) {
    std::vector<double> reps;
    if (t.empty()) {
      reps.push_back(0.0);
    } else {
      reps.push_back(t.front() - 1.0);
      for (std::size_t j = 0; j + 1 < t.size(); ++j) reps.push_back((t[j] + t[j + 1]) / 2.0);
      reps.push_back(t.back() + 1.0);
    }
    if (grid.total > cap / reps.size()) throw Error("cell enumeration exceeds the cap");
    grid.total *= reps.size();
    grid.representatives.push_back(std::move(reps));
  }
  if (grid.total > cap) throw Error("cell enumeration exceeds the cap");
  return grid;
}

std::vector<std::vector<double>> SplitThresholds(const Ensemble& ensemble) {
  std::vector<std::vector<double>> out(ensemble.num_features());
  for (const Tree& tree : ensemble.trees) {
    for (const Node& node : tree.nodes) {
      if (node.is_leaf) continue;
      auto& t = out[node.feature];
      if (std::find(t.begin(), t.end(), node.threshold) == t.end()) t.push_back(node.threshold);
    }
  }
  for (auto& t : out) std::sort(t.begin(), t.end());
  return out;
}

void ForEachCompletion(const CellGrid& grid, std::span<const double> x,
                       const std::vector<bool>& fixed,
                       const std::function<void(const Instance&)>& visit) {
  const std::size_t n = grid.representatives.size();
  Instance point(n);
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t f = 0; f < n; ++f)
    point[f] = fixed[f] ? x[f] : grid.representatives[f][0];
  while (true) {
    visit(point);
    std::size_t f = 0;
    for (; f < n; ++f) {
      if (fixed[f]) continue;
      if (++digit[f] < grid.representatives[f].size()) {
        point[f] = grid.representatives[f][digit[f]];
        break;
      }
      digit[f] = 0;
      point[f] = grid.representatives[f][0];
    }
    if (f == n) return;
  }
}

namespace {

double LeafValue(const Tree& tree, int node, const Instance& point) {
  const Node& nd = tree.nodes[node];
  if (nd.is_leaf) return nd.value;
  return LeafValue(tree, point[nd.feature] <= nd.threshold ? nd.left : nd.right, point);
}

std::int64_t Scaled(double v, std::int64_t scale) {
  return std::llround(v * static_cast<double>(scale));
}

std::int64_t ScaledGap(const Ensemble& ensemble, const Instance& point, int winner, int rival,
                       std::int64_t scale) {
  const bool binary = ensemble.objective == Objective::kBinaryRaw;
  std::vector<std::int64_t> score(ensemble.num_labels(), 0);
  if (binary) {
    score[1] = Scaled(ensemble.base_scores[0], scale);
  } else {
    for (int c = 0; c < ensemble.num_classes; ++c) score[c] = Scaled(ensemble.base_scores[c], scale);
  }
  for (const Tree& tree : ensemble.trees)
    score[binary ? 1 : tree.class_index] += Scaled(LeafValue(tree, tree.root, point), scale);
  return score[rival] - score[winner];
}

}  // namespace

std::int64_t BruteMaxGapScaled(const Ensemble& ensemble, std::span<const double> x,
                               const std::vector<bool>& fixed, int winner, int rival,
                               std::int64_t scale, std::size_t cap) {
  const CellGrid grid = EnumerateCells(SplitThresholds(ensemble), cap);
  std::int64_t best = std::numeric_limits<std::int64_t>::min();
  ForEachCompletion(grid, x, fixed, [&](const Instance& point) {
    best = std::max(best, ScaledGap(ensemble, point, winner, rival, scale));
  });
  return best;
}

double BruteMaxGap(const Ensemble& ensemble, std::span<const double> x,
                   const std::vector<bool>& fixed, int winner, int rival, std::int64_t scale,
                   std::size_t cap) {
  return static_cast<double>(BruteMaxGapScaled(ensemble, x, fixed, winner, rival, scale, cap)) /
         static_cast<double>(scale);
}

bool BruteEntails(const Ensemble& ensemble, std::span<const double> x,
                  const std::vector<bool>& fixed, int predicted, std::size_t cap) {
  const CellGrid grid = EnumerateCells(SplitThresholds(ensemble), cap);
  bool all = true;
  ForEachCompletion(grid, x, fixed, [&](const Instance& point) {
    if (all && Predict(ensemble, point) != predicted) all = false;
  });
  return all;
}

namespace {

int BuildNode(Tree& tree, std::mt19937_64& rng, int depth, int num_features,
              const SmallModelLimits& limits) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (depth < limits.max_depth && rng() % 10 < 7) {
    const int feature = static_cast<int>(rng() % static_cast<std::uint64_t>(num_features));
    const double threshold = limits.threshold_grid[rng() % limits.threshold_grid.size()];
    const int left = BuildNode(tree, rng, depth + 1, num_features, limits);
    const int right = BuildNode(tree, rng, depth + 1, num_features, limits);
    tree.nodes[id] = Node::Split(feature, threshold, left, right);
  } else {
    tree.nodes[id] = Node::Leaf(static_cast<double>(static_cast<int>(rng() % 17) - 8) * 0.25);
  }
  return id;
}

}  // namespace

Ensemble RandomSmallEnsemble(std::uint64_t seed, const SmallModelLimits& limits) {
  std::mt19937_64 rng(seed);
  const int num_features = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(limits.max_features));
  std::vector<std::string> names;
  for (int f = 0; f < num_features; ++f) names.push_back("f" + std::to_string(f));

  Ensemble e;
  e.features = FeatureSpace(std::move(names));
  const bool multiclass = limits.allow_multiclass && limits.max_trees >= 2 && rng() % 3 == 0;
  if (multiclass) {
    e.objective = Objective::kMulticlassRaw;
    e.num_classes = 2 + static_cast<int>(rng() % 2);
    if (e.num_classes > limits.max_trees) e.num_classes = limits.max_trees;
  }
  int num_trees = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(limits.max_trees));
  if (multiclass) num_trees = std::max(num_trees, e.num_classes);
  for (int t = 0; t < num_trees; ++t) {
    Tree tree;
    tree.root = BuildNode(tree, rng, 0, num_features, limits);
    tree.class_index = multiclass ? t % e.num_classes : 0;
    e.trees.push_back(std::move(tree));
  }
  e.base_scores.assign(e.num_outputs(), 0.0);
  if (rng() % 4 == 0)
    for (double& b : e.base_scores) b = static_cast<double>(static_cast<int>(rng() % 5) - 2) * 0.25;
  Validate(e);
  return e;
}

Instance RandomGridInstance(std::uint64_t seed, const Ensemble& ensemble,
                            const SmallModelLimits& limits) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> candidates = limits.threshold_grid;
  const auto& g = limits.threshold_grid;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) candidates.push_back((g[i] + g[i + 1]) / 2.0);
  if (!g.empty()) {
    candidates.push_back(g.front() - 1.0);
    candidates.push_back(g.back() + 1.0);
  }
  Instance x(ensemble.num_features());
  for (double& v : x) v = candidates[rng() % candidates.size()];
  return x;
}

}  // namespace gbtx::refcheck
