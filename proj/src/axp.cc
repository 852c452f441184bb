#include "gbtx/axp.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbtx/error.h"

namespace gbtx {

bool Explanation::Keeps(int feature) const {
  return std::any_of(kept.begin(), kept.end(), [&](const auto& k) { return k.first == feature; });
}

std::vector<int> FeatureOrder(const EncodedModel& encoded, std::span<const double> x,
                              OrderPolicy policy) {
  const int n = static_cast<int>(encoded.thresholds.num_features());
  std::vector<int> order(n);
  for (int f = 0; f < n; ++f) order[f] = f;
  if (policy == OrderPolicy::kIndex) return order;

  std::vector<double> margin(n, std::numeric_limits<double>::infinity());
  for (int f = 0; f < n; ++f)
    for (double t : encoded.thresholds.thresholds(f))
      margin[f] = std::min(margin[f], std::abs(x[f] - t));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return margin[a] > margin[b]; });
  return order;
}

std::vector<Lit> FixedAssumptions(const EncodedModel& encoded, std::span<const double> x,
                                  const std::vector<bool>& fixed) {
  std::vector<int> features;
  for (std::size_t f = 0; f < fixed.size(); ++f)
    if (fixed[f]) features.push_back(static_cast<int>(f));
  return InstanceToAssumptions(encoded, x, features);
}

Explanation ExtractAxp(Oracle& oracle, std::span<const double> x, OrderPolicy policy) {
  const EncodedModel& encoded = oracle.encoded();
  const std::size_t n = encoded.thresholds.num_features();
  if (x.size() != n) throw SchemaError("instance width does not match the model");

  Explanation e;
  e.predicted = Predict(oracle.ensemble(), x);
  std::vector<bool> fixed(n, true);
  if (!oracle.Entails(FixedAssumptions(encoded, x, fixed), e.predicted).valid)
    throw OracleError("raw score is within rounding distance of a class boundary; "
                      "increase the scale");

  for (int f : FeatureOrder(encoded, x, policy)) {
    fixed[f] = false;
    if (!oracle.Entails(FixedAssumptions(encoded, x, fixed), e.predicted).valid) fixed[f] = true;
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (fixed[f]) {
      e.kept.emplace_back(static_cast<int>(f), x[f]);
    } else {
      e.free.push_back(static_cast<int>(f));
    }
  }
  return e;
}

nlohmann::ordered_json ExplanationToJson(const Explanation& e, const FeatureSpace& features) {
  nlohmann::ordered_json j;
  j["instance"] = e.instance;
  j["class"] = e.predicted;
  auto& kept = j["kept"] = nlohmann::ordered_json::array();
  for (const auto& [f, v] : e.kept) kept.push_back({{"feature", features.name(f)}, {"value", v}});
  auto& free = j["free"] = nlohmann::ordered_json::array();
  for (int f : e.free) free.push_back(features.name(f));
  return j;
}

OrderPolicy ParseOrderPolicy(const std::string& name) {
  if (name == "index") return OrderPolicy::kIndex;
  if (name == "margin") return OrderPolicy::kMargin;
  throw UsageError("unknown order policy '" + name + "'");
}

}  // namespace gbtx
