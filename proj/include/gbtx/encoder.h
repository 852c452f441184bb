#ifndef GBTX_ENCODER_H_
#define GBTX_ENCODER_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gbtx/model.h"

namespace gbtx {

// DIMACS-style literal: +v asserts variable v, -v its negation. Variables
// are numbered from 1.
using Lit = int;
using Clause = std::vector<Lit>;

inline int VarOf(Lit lit) { return lit < 0 ? -lit : lit; }

// Per feature, the sorted distinct split thresholds t_0 < ... < t_{k-1} and
// one atom per threshold meaning "value <= t_j".
//
// A feature with k thresholds partitions the reals into k+1 cells; cell j is
// (t_{j-1}, t_j] with t_{-1} = -inf and t_k = +inf. Atom j holds exactly in
// cells 0..j.
class ThresholdMap {
 public:
  struct AtomRef {
    int feature;
    int rank;
  };

  ThresholdMap() = default;
  // `thresholds` must be sorted and duplicate-free per feature. Atom
  // variables are assigned consecutively from `first_var`.
  ThresholdMap(std::vector<std::vector<double>> thresholds, int first_var = 1);

  std::size_t num_features() const { return thresholds_.size(); }
  std::span<const double> thresholds(int feature) const { return thresholds_[feature]; }
  const std::vector<std::vector<double>>& all_thresholds() const { return thresholds_; }
  int var(int feature, int rank) const { return first_var_[feature] + rank; }
  std::size_t num_atoms() const { return atoms_.size(); }
  bool IsAtom(int var) const;
  AtomRef Atom(int var) const { return atoms_[var - base_]; }
  // Rank of `threshold` among the feature's thresholds, or -1.
  int RankOf(int feature, double threshold) const;
  // Index of the cell containing `value`.
  int CellOf(int feature, double value) const;
  int num_cells(int feature) const { return static_cast<int>(thresholds_[feature].size()) + 1; }

 private:
  std::vector<std::vector<double>> thresholds_;
  std::vector<int> first_var_;
  std::vector<AtomRef> atoms_;
  int base_ = 1;
};

struct PathEntry {
  int tree = 0;
  int leaf_node = 0;
  int var = 0;
  double value = 0.0;
  // Root-to-leaf predicates; left branch -> positive atom, right -> negated.
  std::vector<Lit> conditions;
};

struct EncodedModel {
  std::shared_ptr<const Ensemble> ensemble;
  ThresholdMap thresholds;
  // Paths of all trees, grouped by tree in leaf order.
  std::vector<PathEntry> paths;
  // paths[tree_begin[t] .. tree_begin[t+1]) belong to tree t.
  std::vector<int> tree_begin;
  int num_vars = 0;
  std::vector<Clause> clauses;
  std::size_t num_ordering_clauses = 0;

  std::size_t num_trees() const { return tree_begin.size() - 1; }
  std::span<const PathEntry> TreePaths(int tree) const {
    return std::span<const PathEntry>(paths).subspan(
        tree_begin[tree], tree_begin[tree + 1] - tree_begin[tree]);
  }
};

ThresholdMap CollectThresholds(const Ensemble& ensemble);

// One entry per leaf, in depth-first left-first order. Path variables are
// left at 0; EncodeEnsemble assigns them.
std::vector<PathEntry> EncodeTree(const Tree& tree, int tree_index,
                                  const ThresholdMap& thresholds);

EncodedModel EncodeEnsemble(std::shared_ptr<const Ensemble> ensemble);

// For each fixed feature, pins every threshold atom of that feature to the
// truth value implied by the instance.
std::vector<Lit> InstanceToAssumptions(const EncodedModel& encoded,
                                       std::span<const double> x,
                                       std::span<const int> fixed_features);

// Assignment indexed by variable (slot 0 unused).
bool SatisfiesAll(const EncodedModel& encoded, const std::vector<bool>& assignment);

// Hard clauses in DIMACS CNF, with comment lines labelling every variable.
std::string ToDimacs(const EncodedModel& encoded);

}  // namespace gbtx

#endif  // GBTX_ENCODER_H_
