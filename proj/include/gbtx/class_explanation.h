#ifndef GBTX_CLASS_EXPLANATION_H_
#define GBTX_CLASS_EXPLANATION_H_

#include <span>
#include <string>
#include <vector>

#include "gbtx/axp.h"
#include "gbtx/dataset.h"
#include "json.hpp"

namespace gbtx {

enum class IntervalMethod { kQuantile, kCluster };

struct IntervalOptions {
  IntervalMethod method = IntervalMethod::kQuantile;
  // Trimming level of the quantile method; interval = [q(alpha), q(1-alpha)].
  double alpha = 0.05;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool Contains(double v) const { return lo <= v && v <= hi; }
  bool operator==(const Interval&) const = default;
};

// Linear-interpolation quantile of sorted values: h = (n-1)p, interpolate
// between the neighbouring order statistics.
double Quantile(std::span<const double> sorted, double p);

// Typical range of a feature's values. `values` must be nonempty.
//   quantile: [q(alpha), q(1-alpha)].
//   cluster:  optimal 1-D 2-means split; range of the larger cluster, ties
//             going to the cluster that holds the lower median.
Interval IntervalOf(std::span<const double> values, const IntervalOptions& options);

struct FeatureSummary {
  int feature = 0;
  Interval interval;
  int support = 0;
  double frequency = 0.0;

  bool operator==(const FeatureSummary&) const = default;
};

struct ClassExplanation {
  int class_index = 0;
  // Instances predicted as this class.
  int population = 0;
  // Ascending feature index.
  std::vector<FeatureSummary> features;

  const FeatureSummary* Find(int feature) const;
  bool empty() const { return features.empty(); }
  bool operator==(const ClassExplanation&) const = default;
};

// Reduce step: union of the kept features of every explanation predicted as
// each class, with one interval per feature.
std::vector<ClassExplanation> AggregateClassExplanations(
    int num_labels, std::span<const Explanation> explanations, const IntervalOptions& options);

struct ClassExplainOptions {
  OrderPolicy order = OrderPolicy::kIndex;
  IntervalOptions interval;
  std::int64_t scale = kDefaultScale;
  int jobs = 1;
};

// Explains every dataset row, then aggregates by predicted class.
std::vector<Explanation> ExplainAll(const EncodedModel& encoded,
                                    std::span<const Instance> rows, OrderPolicy order,
                                    std::int64_t scale, int jobs);

std::vector<ClassExplanation> BuildClassExplanations(const EncodedModel& encoded,
                                                     const Dataset& dataset,
                                                     const ClassExplainOptions& options);

nlohmann::ordered_json ClassExplanationsToJson(std::span<const ClassExplanation> classes,
                                               const FeatureSpace& features);
std::vector<ClassExplanation> ClassExplanationsFromJson(const std::string& text,
                                                        const FeatureSpace& features);

IntervalMethod ParseIntervalMethod(const std::string& name);

}  // namespace gbtx

#endif  // GBTX_CLASS_EXPLANATION_H_
