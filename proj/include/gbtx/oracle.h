#ifndef GBTX_ORACLE_H_
#define GBTX_ORACLE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gbtx/encoder.h"
#include "gbtx/model.h"
#include "gbtx/sat_solver.h"

namespace gbtx {

inline constexpr std::int64_t kDefaultScale = 1'000'000;

// round(scale * value), halves rounded away from zero.
std::int64_t ScaleValue(double value, std::int64_t scale);

// Integer objective of a (winner, rival) gap query: the gap of a completion
// is constant + sum of the weights of its selected paths. Each tree's
// weights are shifted by its minimum (offsets[t]) so every weight is >= 0.
//
// For binary models the pseudo-classes are score_1 = raw and score_0 = 0.
struct ScaledObjective {
  std::int64_t scale = kDefaultScale;
  std::vector<std::int64_t> weights;  // per path
  std::vector<std::int64_t> offsets;  // per tree
  std::int64_t constant = 0;
};

ScaledObjective BuildScaledObjective(const EncodedModel& encoded, int winner, int rival,
                                     std::int64_t scale = kDefaultScale);

struct Witness {
  // Truth value per variable (slot 0 unused); covers atoms and path literals.
  std::vector<bool> assignment;
  // Selected path index (into EncodedModel::paths) per tree.
  std::vector<int> paths;
  std::int64_t gap = 0;
};

struct GapResult {
  std::int64_t scaled_gap = 0;
  double gap = 0.0;
  std::optional<Witness> witness;
};

struct EntailResult {
  bool valid = true;
  int rival = -1;
  std::int64_t scaled_gap = 0;
  std::optional<Witness> counterexample;
};

// Reasoning context over one EncodedModel. Owns a SAT solver loaded with the
// hard clauses; the model must outlive the context. Single-threaded: give
// each worker thread its own Oracle.
class Oracle {
 public:
  explicit Oracle(const EncodedModel& encoded, std::int64_t scale = kDefaultScale);

  const EncodedModel& encoded() const { return encoded_; }
  const Ensemble& ensemble() const { return *encoded_.ensemble; }
  std::int64_t scale() const { return scale_; }
  std::uint64_t num_queries() const { return queries_; }

  // Full assignment if the hard clauses plus assumptions are satisfiable.
  std::optional<std::vector<bool>> Solve(std::span<const Lit> assumptions);

  // Exact maximum of score_rival - score_winner over all completions of the
  // fixed threshold atoms. `hint`, when given, picks the witness cell of each
  // unconstrained feature closest to the hint's value.
  // Throws OracleError("inconsistent fixed values") on infeasible input.
  GapResult MaxScoreGap(std::span<const Lit> fixed, int winner, int rival,
                        std::span<const double> hint = {});

  // Valid iff no completion of `fixed` makes predict() return another class.
  // Rivals are scanned in ascending index; the first counterexample wins.
  EntailResult Entails(std::span<const Lit> fixed, int predicted);

  // Concrete instance inside the witness cells; keeps reference values that
  // already lie in their cell.
  Instance WitnessToInstance(const Witness& witness, std::span<const double> reference) const;

 private:
  struct Bound {
    int feature;
    int lo;
    int hi;
  };

  struct Query;

  GapResult Search(std::span<const Lit> fixed, int winner, int rival,
                   std::span<const double> hint, std::optional<std::int64_t> stop_at);
  void Dfs(Query& q, std::size_t depth, std::int64_t current);
  bool Compatible(int path, const std::vector<int>& lo, const std::vector<int>& hi) const;

  const EncodedModel& encoded_;
  std::int64_t scale_;
  SatSolver sat_;
  std::vector<std::vector<Bound>> path_bounds_;
  std::vector<bool> path_feasible_;
  std::uint64_t queries_ = 0;
};

}  // namespace gbtx

#endif  // GBTX_ORACLE_H_
