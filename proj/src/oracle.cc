#include "gbtx/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbtx/error.h"

namespace gbtx {

std::int64_t ScaleValue(double value, std::int64_t scale) {
  return std::llround(value * static_cast<double>(scale));
}

namespace {

int PseudoClass(const Ensemble& ensemble, const Tree& tree) {
  return ensemble.objective == Objective::kBinaryRaw ? 1 : tree.class_index;
}

double BaseScore(const Ensemble& ensemble, int label) {
  if (ensemble.objective == Objective::kBinaryRaw) return label == 1 ? ensemble.base_scores[0] : 0.0;
  return ensemble.base_scores[label];
}

}  // namespace

ScaledObjective BuildScaledObjective(const EncodedModel& encoded, int winner, int rival,
                                     std::int64_t scale) {
  const Ensemble& ensemble = *encoded.ensemble;
  ScaledObjective obj;
  obj.scale = scale;
  obj.weights.resize(encoded.paths.size(), 0);
  obj.constant = ScaleValue(BaseScore(ensemble, rival), scale) -
                 ScaleValue(BaseScore(ensemble, winner), scale);
  for (std::size_t t = 0; t < encoded.num_trees(); ++t) {
    const int cls = PseudoClass(ensemble, ensemble.trees[t]);
    const int coef = (cls == rival ? 1 : 0) - (cls == winner ? 1 : 0);
    std::int64_t offset = 0;
    if (coef != 0) {
      offset = std::numeric_limits<std::int64_t>::max();
      for (const PathEntry& path : encoded.TreePaths(static_cast<int>(t)))
        offset = std::min(offset, coef * ScaleValue(path.value, scale));
      for (int p = encoded.tree_begin[t]; p < encoded.tree_begin[t + 1]; ++p)
        obj.weights[p] = coef * ScaleValue(encoded.paths[p].value, scale) - offset;
    }
    obj.offsets.push_back(offset);
    obj.constant += offset;
  }
  return obj;
}

struct Oracle::Query {
  ScaledObjective objective;
  std::vector<int> trees;                     // relevant trees, search order
  std::vector<std::vector<int>> tree_paths;   // per search slot, paths by weight desc
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<int> chosen;
  bool found = false;
  std::int64_t best = 0;
  std::vector<int> best_lo;
  std::vector<int> best_hi;
  std::optional<std::int64_t> stop_at;
  bool stopped = false;
};

Oracle::Oracle(const EncodedModel& encoded, std::int64_t scale)
    : encoded_(encoded), scale_(scale), sat_(encoded.num_vars) {
  if (scale < 1) throw OracleError("scale must be positive");
  for (const Clause& clause : encoded.clauses) sat_.AddClause(clause);
  const ThresholdMap& tm = encoded.thresholds;
  for (const PathEntry& path : encoded.paths) {
    std::vector<Bound> bounds;
    bool feasible = true;
    for (Lit lit : path.conditions) {
      const auto atom = tm.Atom(VarOf(lit));
      auto it = std::find_if(bounds.begin(), bounds.end(),
                             [&](const Bound& b) { return b.feature == atom.feature; });
      if (it == bounds.end()) {
        bounds.push_back(Bound{atom.feature, 0, tm.num_cells(atom.feature) - 1});
        it = bounds.end() - 1;
      }
      if (lit > 0) {
        it->hi = std::min(it->hi, atom.rank);
      } else {
        it->lo = std::max(it->lo, atom.rank + 1);
      }
      if (it->lo > it->hi) feasible = false;
    }
    path_bounds_.push_back(std::move(bounds));
    path_feasible_.push_back(feasible);
  }
}

std::optional<std::vector<bool>> Oracle::Solve(std::span<const Lit> assumptions) {
  for (Lit lit : assumptions)
    if (lit == 0 || VarOf(lit) > encoded_.num_vars)
      throw OracleError("assumption references an unregistered variable");
  if (!sat_.Solve(assumptions)) return std::nullopt;
  return sat_.model();
}

bool Oracle::Compatible(int path, const std::vector<int>& lo, const std::vector<int>& hi) const {
  if (!path_feasible_[path]) return false;
  for (const Bound& b : path_bounds_[path])
    if (std::max(lo[b.feature], b.lo) > std::min(hi[b.feature], b.hi)) return false;
  return true;
}

void Oracle::Dfs(Query& q, std::size_t depth, std::int64_t current) {
  if (q.stopped) return;
  if (depth == q.trees.size()) {
    if (!q.found || current > q.best) {
      q.found = true;
      q.best = current;
      q.best_lo = q.lo;
      q.best_hi = q.hi;
      if (q.stop_at && current + q.objective.constant >= *q.stop_at) q.stopped = true;
    }
    return;
  }
  std::int64_t bound = current;
  for (std::size_t k = depth; k < q.trees.size(); ++k) {
    std::int64_t tree_max = -1;
    for (int p : q.tree_paths[k]) {
      if (Compatible(p, q.lo, q.hi)) {
        tree_max = q.objective.weights[p];
        break;
      }
    }
    if (tree_max < 0) return;  // some tree has no reachable leaf in this box
    bound += tree_max;
  }
  if (q.found && bound <= q.best) return;
  if (q.stop_at && bound + q.objective.constant < *q.stop_at) return;

  for (int p : q.tree_paths[depth]) {
    if (!Compatible(p, q.lo, q.hi)) continue;
    std::vector<std::pair<int, std::pair<int, int>>> saved;
    for (const Bound& b : path_bounds_[p]) {
      saved.push_back({b.feature, {q.lo[b.feature], q.hi[b.feature]}});
      q.lo[b.feature] = std::max(q.lo[b.feature], b.lo);
      q.hi[b.feature] = std::min(q.hi[b.feature], b.hi);
    }
    q.chosen[depth] = p;
    Dfs(q, depth + 1, current + q.objective.weights[p]);
    for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
      q.lo[it->first] = it->second.first;
      q.hi[it->first] = it->second.second;
    }
    if (q.stopped) return;
  }
}

GapResult Oracle::Search(std::span<const Lit> fixed, int winner, int rival,
                         std::span<const double> hint, std::optional<std::int64_t> stop_at) {
  const Ensemble& ensemble = *encoded_.ensemble;
  const int labels = ensemble.num_labels();
  if (winner == rival || winner < 0 || rival < 0 || winner >= labels || rival >= labels)
    throw OracleError("gap query needs two distinct valid classes");
  ++queries_;
  const ThresholdMap& tm = encoded_.thresholds;
  for (Lit lit : fixed)
    if (lit == 0 || !tm.IsAtom(VarOf(lit)))
      throw OracleError("gap queries accept threshold atoms only");
  if (!sat_.Solve(fixed)) throw OracleError("inconsistent fixed values");

  Query q;
  q.objective = BuildScaledObjective(encoded_, winner, rival, scale_);
  q.stop_at = stop_at;
  const std::size_t nf = tm.num_features();
  q.lo.assign(nf, 0);
  q.hi.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) q.hi[f] = tm.num_cells(static_cast<int>(f)) - 1;
  for (Lit lit : fixed) {
    const auto atom = tm.Atom(VarOf(lit));
    if (lit > 0) {
      q.hi[atom.feature] = std::min(q.hi[atom.feature], atom.rank);
    } else {
      q.lo[atom.feature] = std::max(q.lo[atom.feature], atom.rank + 1);
    }
  }

  // Trees that do not touch either class carry zero weight; the rest are
  // searched widest-spread first.
  std::vector<std::pair<std::int64_t, int>> order;
  for (std::size_t t = 0; t < encoded_.num_trees(); ++t) {
    std::int64_t spread = 0;
    bool relevant = false;
    for (int p = encoded_.tree_begin[t]; p < encoded_.tree_begin[t + 1]; ++p)
      spread = std::max(spread, q.objective.weights[p]);
    const int cls = PseudoClass(ensemble, ensemble.trees[t]);
    relevant = cls == winner || cls == rival;
    if (relevant) order.emplace_back(-spread, static_cast<int>(t));
  }
  std::sort(order.begin(), order.end());
  for (const auto& [neg_spread, t] : order) {
    q.trees.push_back(t);
    std::vector<int> paths;
    for (int p = encoded_.tree_begin[t]; p < encoded_.tree_begin[t + 1]; ++p) paths.push_back(p);
    std::stable_sort(paths.begin(), paths.end(), [&](int a, int b) {
      return q.objective.weights[a] > q.objective.weights[b];
    });
    q.tree_paths.push_back(std::move(paths));
  }
  q.chosen.assign(q.trees.size(), -1);
  Dfs(q, 0, 0);
  if (!q.found) {
    // Feasibility was established above, so an empty search means the stop
    // bound pruned everything: the maximum lies below it.
    GapResult below;
    below.scaled_gap = *stop_at - 1;
    below.gap = static_cast<double>(below.scaled_gap) / static_cast<double>(scale_);
    return below;
  }

  Witness witness;
  witness.assignment.assign(static_cast<std::size_t>(encoded_.num_vars) + 1, false);
  std::vector<int> cells(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    int cell = q.best_lo[f];
    if (!hint.empty())
      cell = std::clamp(tm.CellOf(static_cast<int>(f), hint[f]), q.best_lo[f], q.best_hi[f]);
    cells[f] = cell;
    const int k = static_cast<int>(tm.thresholds(static_cast<int>(f)).size());
    for (int j = 0; j < k; ++j) witness.assignment[tm.var(static_cast<int>(f), j)] = cell <= j;
  }
  for (std::size_t t = 0; t < encoded_.num_trees(); ++t) {
    int selected = -1;
    for (int p = encoded_.tree_begin[t]; p < encoded_.tree_begin[t + 1]; ++p) {
      if (Compatible(p, cells, cells)) {
        selected = p;
        break;
      }
    }
    witness.paths.push_back(selected);
    witness.assignment[encoded_.paths[selected].var] = true;
  }
  witness.gap = q.best + q.objective.constant;

  GapResult result;
  result.scaled_gap = witness.gap;
  result.gap = static_cast<double>(witness.gap) / static_cast<double>(scale_);
  result.witness = std::move(witness);
  return result;
}

GapResult Oracle::MaxScoreGap(std::span<const Lit> fixed, int winner, int rival,
                              std::span<const double> hint) {
  return Search(fixed, winner, rival, hint, std::nullopt);
}

EntailResult Oracle::Entails(std::span<const Lit> fixed, int predicted) {
  const int labels = ensemble().num_labels();
  for (int rival = 0; rival < labels; ++rival) {
    if (rival == predicted) continue;
    // A lower-index rival wins ties, so it only needs to draw level.
    const std::int64_t flips_at = rival < predicted ? 0 : 1;
    GapResult r = Search(fixed, predicted, rival, {}, flips_at);
    if (r.scaled_gap >= flips_at) {
      EntailResult out;
      out.valid = false;
      out.rival = rival;
      out.scaled_gap = r.scaled_gap;
      out.counterexample = std::move(r.witness);
      return out;
    }
  }
  return EntailResult{};
}

Instance Oracle::WitnessToInstance(const Witness& witness,
                                   std::span<const double> reference) const {
  const ThresholdMap& tm = encoded_.thresholds;
  Instance out(reference.begin(), reference.end());
  for (std::size_t f = 0; f < tm.num_features(); ++f) {
    const auto t = tm.thresholds(static_cast<int>(f));
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (witness.assignment[tm.var(static_cast<int>(f), static_cast<int>(j))]) {
        hi = t[j];
        break;
      }
      lo = t[j];
    }
    const double v = reference[f];
    if (lo < v && v <= hi) continue;
    if (std::isfinite(hi)) {
      out[f] = hi;
    } else {
      out[f] = lo + std::max(1e-6, 1e-6 * std::abs(lo));
    }
  }
  return out;
}

}  // namespace gbtx
