#ifndef GBTX_SAT_SOLVER_H_
#define GBTX_SAT_SOLVER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "gbtx/encoder.h"

namespace gbtx {

// Conflict-driven clause-learning solver over DIMACS literals with
// solving under assumptions. Deterministic: no randomness, fixed tie-breaks.
// Not thread-safe; use one instance per thread.
class SatSolver {
 public:
  explicit SatSolver(int num_vars);

  int num_vars() const { return num_vars_; }

  // Returns false once the clause database is unsatisfiable at level 0.
  bool AddClause(std::span<const Lit> clause);

  // True when satisfiable together with `assumptions`. On success the model
  // is available through Value()/model() until the next call.
  bool Solve(std::span<const Lit> assumptions = {});

  bool Value(int var) const { return model_[var]; }
  // Indexed by variable; slot 0 unused.
  const std::vector<bool>& model() const { return model_; }

  std::uint64_t conflicts() const { return conflicts_; }

 private:
  // Internal literal code: 2*(var-1) + sign.
  static int Code(Lit lit) { return 2 * (VarOf(lit) - 1) + (lit < 0 ? 1 : 0); }
  static int Neg(int code) { return code ^ 1; }
  static int VarIndex(int code) { return code >> 1; }

  // -1 unassigned, 0 false, 1 true.
  int LitValue(int code) const {
    const int v = assigns_[VarIndex(code)];
    return v < 0 ? -1 : (v ^ (code & 1));
  }
  int level() const { return static_cast<int>(trail_lim_.size()); }

  void Enqueue(int code, int reason);
  int Propagate();  // conflicting clause index or -1
  void Analyze(int conflict, std::vector<int>& learnt, int& backtrack_level);
  void CancelUntil(int target);
  int PickBranch();
  void Bump(int var);
  int AttachClause(std::vector<int> lits);

  int num_vars_;
  bool ok_ = true;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;  // per literal code: clause ids
  std::vector<int> assigns_;
  std::vector<int> var_level_;
  std::vector<int> reason_;
  std::vector<bool> phase_;
  std::vector<double> activity_;
  double bump_ = 1.0;
  std::vector<int> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<bool> seen_;
  std::vector<bool> model_;
  std::uint64_t conflicts_ = 0;
};

}  // namespace gbtx

#endif  // GBTX_SAT_SOLVER_H_
