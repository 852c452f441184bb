#include "gbtx/class_explanation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gbtx/error.h"
#include "gbtx/parallel.h"

namespace gbtx {

double Quantile(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto below = static_cast<std::size_t>(std::floor(h));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  return sorted[below] + (h - static_cast<double>(below)) * (sorted[above] - sorted[below]);
}

namespace {

Interval LargerCluster(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  // Prefix sums give the within-cluster sum of squares of any contiguous run.
  std::vector<double> sum(n + 1, 0.0), sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + sorted[i];
    sq[i + 1] = sq[i] + sorted[i] * sorted[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {
    const double s = sum[b] - sum[a];
    return (sq[b] - sq[a]) - s * s / static_cast<double>(b - a);
  };
  std::size_t split = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < n; ++k) {
    if (sorted[k] == sorted[k - 1]) continue;  // equal values share a cluster
    const double cost = sse(0, k) + sse(k, n);
    if (cost < best) {
      best = cost;
      split = k;
    }
  }
  const std::size_t left = split;
  const std::size_t right = n - split;
  const std::size_t median = (n - 1) / 2;
  const bool take_left = left > right || (left == right && median < split);
  return take_left ? Interval{sorted.front(), sorted[split - 1]}
                   : Interval{sorted[split], sorted.back()};
}

}  // namespace

Interval IntervalOf(std::span<const double> values, const IntervalOptions& options) {
  if (values.empty()) throw SchemaError("interval of an empty value list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) return Interval{sorted.front(), sorted.front()};
  if (options.method == IntervalMethod::kCluster) return LargerCluster(sorted);
  return Interval{Quantile(sorted, options.alpha), Quantile(sorted, 1.0 - options.alpha)};
}

const FeatureSummary* ClassExplanation::Find(int feature) const {
  for (const auto& s : features)
    if (s.feature == feature) return &s;
  return nullptr;
}

std::vector<ClassExplanation> AggregateClassExplanations(
    int num_labels, std::span<const Explanation> explanations, const IntervalOptions& options) {
  std::vector<ClassExplanation> out(num_labels);
  std::vector<std::map<int, std::vector<double>>> values(num_labels);
  for (int c = 0; c < num_labels; ++c) out[c].class_index = c;
  for (const Explanation& e : explanations) {
    ++out.at(e.predicted).population;
    for (const auto& [f, v] : e.kept) values[e.predicted][f].push_back(v);
  }
  for (int c = 0; c < num_labels; ++c) {
    for (const auto& [f, vs] : values[c]) {
      FeatureSummary s;
      s.feature = f;
      s.interval = IntervalOf(vs, options);
      s.support = static_cast<int>(vs.size());
      s.frequency = static_cast<double>(s.support) / static_cast<double>(out[c].population);
      out[c].features.push_back(s);
    }
  }
  return out;
}

std::vector<Explanation> ExplainAll(const EncodedModel& encoded,
                                    std::span<const Instance> rows, OrderPolicy order,
                                    std::int64_t scale, int jobs) {
  return ParallelMap<Explanation>(
      rows.size(), jobs, [&] { return Oracle(encoded, scale); },
      [&](Oracle& oracle, std::size_t i) {
        Explanation e = ExtractAxp(oracle, rows[i], order);
        e.instance = static_cast<int>(i);
        return e;
      });
}

std::vector<ClassExplanation> BuildClassExplanations(const EncodedModel& encoded,
                                                     const Dataset& dataset,
                                                     const ClassExplainOptions& options) {
  if (dataset.size() == 0) throw SchemaError("class explanations need a nonempty dataset");
  const auto explanations =
      ExplainAll(encoded, dataset.rows, options.order, options.scale, options.jobs);
  return AggregateClassExplanations(encoded.ensemble->num_labels(), explanations,
                                    options.interval);
}

nlohmann::ordered_json ClassExplanationsToJson(std::span<const ClassExplanation> classes,
                                               const FeatureSpace& features) {
  auto out = nlohmann::ordered_json::array();
  for (const ClassExplanation& ce : classes) {
    nlohmann::ordered_json j;
    j["class"] = ce.class_index;
    j["population"] = ce.population;
    auto& fs = j["features"] = nlohmann::ordered_json::array();
    for (const FeatureSummary& s : ce.features) {
      fs.push_back({{"name", features.name(s.feature)},
                    {"a", s.interval.lo},
                    {"b", s.interval.hi},
                    {"support", s.support},
                    {"frequency", s.frequency}});
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<ClassExplanation> ClassExplanationsFromJson(const std::string& text,
                                                        const FeatureSpace& features) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("class explanations: invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SchemaError("class explanations: expected array");
  std::vector<ClassExplanation> out;
  try {
    for (const auto& j : doc) {
      ClassExplanation ce;
      ce.class_index = j.at("class").get<int>();
      ce.population = j.at("population").get<int>();
      for (const auto& fj : j.at("features")) {
        const auto name = fj.at("name").get<std::string>();
        const auto index = features.IndexOf(name);
        if (!index) throw SchemaError("class explanations: unknown feature '" + name + "'");
        FeatureSummary s;
        s.feature = *index;
        s.interval = Interval{fj.at("a").get<double>(), fj.at("b").get<double>()};
        s.support = fj.at("support").get<int>();
        s.frequency = fj.at("frequency").get<double>();
        if (s.interval.lo > s.interval.hi)
          throw SchemaError("class explanations: interval with a > b for '" + name + "'");
        ce.features.push_back(s);
      }
      std::sort(ce.features.begin(), ce.features.end(),
                [](const auto& a, const auto& b) { return a.feature < b.feature; });
      if (ce.class_index != static_cast<int>(out.size()))
        throw SchemaError("class explanations: classes must be listed in order");
      out.push_back(std::move(ce));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("class explanations: ") + e.what());
  }
  return out;
}

IntervalMethod ParseIntervalMethod(const std::string& name) {
  if (name == "quantile") return IntervalMethod::kQuantile;
  if (name == "cluster") return IntervalMethod::kCluster;
  throw UsageError("unknown interval method '" + name + "'");
}

}  // namespace gbtx
