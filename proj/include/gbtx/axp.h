#ifndef GBTX_AXP_H_
#define GBTX_AXP_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbtx/oracle.h"
#include "json.hpp"

namespace gbtx {

// Order in which the deletion loop tries to free features.
//   kIndex:  ascending feature index.
//   kMargin: descending distance from the value to the feature's nearest
//            threshold (features without thresholds first), ties by index.
enum class OrderPolicy { kIndex, kMargin };

// Subset-minimal set of fixed features that entails the predicted class.
struct Explanation {
  int instance = -1;
  int predicted = 0;
  // Ascending feature index.
  std::vector<std::pair<int, double>> kept;
  std::vector<int> free;

  bool Keeps(int feature) const;
  bool operator==(const Explanation&) const = default;
};

std::vector<int> FeatureOrder(const EncodedModel& encoded, std::span<const double> x,
                              OrderPolicy policy);

// Deletion-based extraction: one entailment query per feature. Throws
// OracleError if the full instance does not entail its own prediction at the
// oracle's scale (raw score within rounding distance of a class boundary).
Explanation ExtractAxp(Oracle& oracle, std::span<const double> x,
                       OrderPolicy policy = OrderPolicy::kIndex);

// Features whose atoms are pinned, as assumptions for the oracle.
std::vector<Lit> FixedAssumptions(const EncodedModel& encoded, std::span<const double> x,
                                  const std::vector<bool>& fixed);

nlohmann::ordered_json ExplanationToJson(const Explanation& e, const FeatureSpace& features);

OrderPolicy ParseOrderPolicy(const std::string& name);

}  // namespace gbtx

#endif  // GBTX_AXP_H_
