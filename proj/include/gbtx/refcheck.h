#ifndef GBTX_REFCHECK_H_
#define GBTX_REFCHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gbtx/model.h"

// Brute-force ground truth over interval cells, for validating the encoder,
// the oracle and explanation extraction on small models. Deliberately shares
// no code with the encoder or oracle.
namespace gbtx::refcheck {

inline constexpr std::size_t kDefaultCellCap = 1'000'000;

// k thresholds of a feature give k+1 cells. Representatives are midpoints,
// with t_0 - 1 and t_{k-1} + 1 for the unbounded end cells, and 0 for a
// feature without thresholds.
struct CellGrid {
  std::vector<std::vector<double>> thresholds;
  std::vector<std::vector<double>> representatives;
  std::size_t total = 1;
};

// Throws Error when the number of cell combinations exceeds `cap`.
CellGrid EnumerateCells(const std::vector<std::vector<double>>& thresholds,
                        std::size_t cap = kDefaultCellCap);

// Sorted distinct split thresholds per feature, read straight off the trees.
std::vector<std::vector<double>> SplitThresholds(const Ensemble& ensemble);

// Calls visit(point) for every cell combination. Features with fixed[f]
// set take x[f] instead of ranging over their cells.
void ForEachCompletion(const CellGrid& grid, std::span<const double> x,
                       const std::vector<bool>& fixed,
                       const std::function<void(const Instance&)>& visit);

// Maximum of score_rival - score_winner (in units of 1/scale, leaf values
// rounded half away from zero) over all completions of the fixed features.
std::int64_t BruteMaxGapScaled(const Ensemble& ensemble, std::span<const double> x,
                               const std::vector<bool>& fixed, int winner, int rival,
                               std::int64_t scale, std::size_t cap = kDefaultCellCap);

double BruteMaxGap(const Ensemble& ensemble, std::span<const double> x,
                   const std::vector<bool>& fixed, int winner, int rival,
                   std::int64_t scale, std::size_t cap = kDefaultCellCap);

// True iff every completion of the fixed features predicts `predicted`.
bool BruteEntails(const Ensemble& ensemble, std::span<const double> x,
                  const std::vector<bool>& fixed, int predicted,
                  std::size_t cap = kDefaultCellCap);

struct SmallModelLimits {
  int max_features = 3;
  int max_trees = 4;
  int max_depth = 3;
  bool allow_multiclass = true;
  std::vector<double> threshold_grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
};

// Deterministic in `seed`. Leaf values are multiples of 0.25 in [-2, 2].
Ensemble RandomSmallEnsemble(std::uint64_t seed, const SmallModelLimits& limits = {});

// Values drawn from the threshold grid and the points between and around it,
// so boundary values are hit exactly.
Instance RandomGridInstance(std::uint64_t seed, const Ensemble& ensemble,
                            const SmallModelLimits& limits = {});

}  // namespace gbtx::refcheck

#endif  // GBTX_REFCHECK_H_
