#ifndef GBTX_METRICS_H_
#define GBTX_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbtx/axp.h"

namespace gbtx {

// Per-feature ranks (1 = most important, ties allowed, contiguous from 1)
// and the best-first feature list with ties broken by feature index.
struct Ranking {
  std::vector<int> ranks;
  std::vector<int> order;

  bool operator==(const Ranking&) const = default;
};

// Densifies arbitrary positive ranks to 1..k, keeping their order.
Ranking MakeRanking(std::span<const int> ranks);
// Strict ranking from a best-first permutation of 0..n-1.
Ranking RankingFromOrder(std::span<const int> order);

// Explanation features rank 1, everything else rank 2.
Ranking FormalRanking(const Explanation& explanation, std::size_t num_features);

// Average ranks of `values` (ties share the mean of their positions).
std::vector<double> FractionalRanks(std::span<const int> values);

// nullopt marks a degenerate input (zero rank variance / all tied).
std::optional<double> Spearman(const Ranking& a, const Ranking& b);
std::optional<double> KendallTauB(const Ranking& a, const Ranking& b);

inline constexpr double kDefaultRboP = 0.9;

// Extrapolated rank-biased overlap of two equal-length lists without
// repeated items, evaluated at depth = list length.
double Rbo(std::span<const int> a, std::span<const int> b, double p = kDefaultRboP);

// Fraction of positions where both runs produced the identical ranking.
double Consistency(std::span<const Ranking> run1, std::span<const Ranking> run2);

struct InstanceMetrics {
  int instance = 0;
  std::optional<double> spearman;
  std::optional<double> kendall;
  double rbo = 0.0;
};

struct Aggregate {
  std::optional<double> min, avg, max;
  int count = 0;
};

Aggregate Summarize(std::span<const std::optional<double>> values);

std::string MetricsCsv(std::span<const InstanceMetrics> rows);

}  // namespace gbtx

#endif  // GBTX_METRICS_H_
