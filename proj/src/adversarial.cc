#include "gbtx/adversarial.h"

#include <cmath>

#include "gbtx/dataset.h"
#include "gbtx/error.h"
#include "gbtx/parallel.h"

namespace gbtx {

const char* FeatureFlagName(FeatureFlag flag) {
  switch (flag) {
    case FeatureFlag::kOk:
      return "ok";
    case FeatureFlag::kMissingFromClass:
      return "missing_from_class";
    case FeatureFlag::kOutsideInterval:
      return "outside_interval";
  }
  return "ok";
}

DetectionResult DetectFromExplanation(const Explanation& explanation,
                                      std::span<const ClassExplanation> classes,
                                      double min_frequency) {
  DetectionResult r;
  r.predicted = explanation.predicted;
  r.explained = static_cast<int>(explanation.kept.size());
  const ClassExplanation* ce = nullptr;
  if (explanation.predicted >= 0 && static_cast<std::size_t>(explanation.predicted) < classes.size())
    ce = &classes[explanation.predicted];
  r.empty_class = ce == nullptr || ce->empty();
  for (const auto& [f, v] : explanation.kept) {
    const FeatureSummary* s = ce ? ce->Find(f) : nullptr;
    FeatureFlag flag = FeatureFlag::kOk;
    if (s == nullptr || s->frequency < min_frequency) {
      flag = FeatureFlag::kMissingFromClass;
    } else if (!s->interval.Contains(v)) {
      flag = FeatureFlag::kOutsideInterval;
    }
    if (flag != FeatureFlag::kOk) ++r.discrepancies;
    r.flags.emplace_back(f, flag);
  }
  if (r.explained == 0) {
    r.empty_explanation = true;
    r.s_adv = 0.0;
  } else {
    r.s_adv = static_cast<double>(r.discrepancies) / static_cast<double>(r.explained);
  }
  return r;
}

DetectionResult Detect(Oracle& oracle, std::span<const ClassExplanation> classes,
                       std::span<const double> x, OrderPolicy order, double min_frequency) {
  return DetectFromExplanation(ExtractAxp(oracle, x, order), classes, min_frequency);
}

bool ClassifyAdversarial(const DetectionResult& result, double tau) {
  return result.s_adv >= tau;
}

AttackMode ParseAttackMode(const std::string& name) {
  if (name == "interval") return AttackMode::kInterval;
  if (name == "witness") return AttackMode::kWitness;
  throw UsageError("unknown attack mode '" + name + "'");
}

double L2Distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

namespace {

std::vector<int> ChangedFeatures(std::span<const double> a, std::span<const double> b) {
  std::vector<int> out;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) out.push_back(static_cast<int>(i));
  return out;
}

AdvResult MakeResult(const Ensemble& ensemble, std::span<const double> x, Instance perturbed,
                     int original_class, int rival) {
  AdvResult r;
  r.original.assign(x.begin(), x.end());
  r.perturbed = std::move(perturbed);
  r.original_class = original_class;
  r.new_class = Predict(ensemble, r.perturbed);
  r.rival = rival;
  r.l2 = L2Distance(r.original, r.perturbed);
  r.changed = ChangedFeatures(r.original, r.perturbed);
  return r;
}

// Moves every candidate feature lying outside the rival's interval to the
// nearest endpoint; on a flip, reverts features one at a time while the
// prediction stays flipped.
std::optional<AdvResult> IntervalAttack(const Ensemble& ensemble,
                                        std::span<const ClassExplanation> classes,
                                        std::span<const double> x, int predicted,
                                        const std::vector<int>& candidates) {
  for (int rival = 0; rival < ensemble.num_labels(); ++rival) {
    if (rival == predicted || static_cast<std::size_t>(rival) >= classes.size()) continue;
    Instance y(x.begin(), x.end());
    std::vector<int> changed;
    for (int f : candidates) {
      const FeatureSummary* s = classes[rival].Find(f);
      if (s == nullptr || s->interval.Contains(x[f])) continue;
      y[f] = x[f] < s->interval.lo ? s->interval.lo : s->interval.hi;
      changed.push_back(f);
    }
    if (changed.empty() || Predict(ensemble, y) == predicted) continue;

    std::vector<double> trace{L2Distance(x, y)};
    for (int f : changed) {
      const double moved = y[f];
      y[f] = x[f];
      if (Predict(ensemble, y) == predicted) {
        y[f] = moved;
      } else {
        trace.push_back(L2Distance(x, y));
      }
    }
    AdvResult r = MakeResult(ensemble, x, std::move(y), predicted, rival);
    r.reversion_trace = std::move(trace);
    return r;
  }
  return std::nullopt;
}

std::optional<AdvResult> WitnessAttack(Oracle& oracle, std::span<const double> x, int predicted,
                                       const std::vector<bool>& free) {
  const Ensemble& ensemble = oracle.ensemble();
  std::vector<bool> fixed(free.size());
  for (std::size_t f = 0; f < free.size(); ++f) fixed[f] = !free[f];
  const auto assumptions = FixedAssumptions(oracle.encoded(), x, fixed);
  for (int rival = 0; rival < ensemble.num_labels(); ++rival) {
    if (rival == predicted) continue;
    GapResult g = oracle.MaxScoreGap(assumptions, predicted, rival, x);
    const bool flips = g.scaled_gap > 0 || (g.scaled_gap == 0 && rival < predicted);
    if (!flips) continue;
    Instance y = oracle.WitnessToInstance(*g.witness, x);
    if (Predict(ensemble, y) == predicted) continue;  // lost to rounding
    AdvResult r = MakeResult(ensemble, x, std::move(y), predicted, rival);
    r.reversion_trace = {r.l2};
    return r;
  }
  return std::nullopt;
}

}  // namespace

std::optional<AdvResult> Generate(Oracle& oracle, std::span<const ClassExplanation> classes,
                                  std::span<const double> x, const AttackOptions& options) {
  const Ensemble& ensemble = oracle.ensemble();
  const std::size_t n = ensemble.num_features();
  const Explanation e = ExtractAxp(oracle, x, options.order);

  std::vector<int> explained;
  std::vector<bool> free(n, false);
  for (const auto& [f, v] : e.kept) {
    explained.push_back(f);
    free[f] = true;
  }
  std::vector<int> all(n);
  for (std::size_t f = 0; f < n; ++f) all[f] = static_cast<int>(f);

  std::optional<AdvResult> r;
  if (options.mode == AttackMode::kInterval) {
    r = IntervalAttack(ensemble, classes, x, e.predicted, explained);
    if (!r && options.full_free_fallback) r = IntervalAttack(ensemble, classes, x, e.predicted, all);
  } else {
    r = WitnessAttack(oracle, x, e.predicted, free);
    if (!r && options.full_free_fallback)
      r = WitnessAttack(oracle, x, e.predicted, std::vector<bool>(n, true));
  }
  return r;
}

AttackReport EvaluateAttack(const EncodedModel& encoded,
                            std::span<const ClassExplanation> classes,
                            std::span<const Instance> rows, const AttackEvalOptions& options) {
  if (rows.empty()) throw SchemaError("attack evaluation needs a nonempty dataset");
  const Ensemble& ensemble = *encoded.ensemble;
  AttackReport report;
  report.samples = ParallelMap<SampleOutcome>(
      rows.size(), options.jobs, [&] { return Oracle(encoded, options.scale); },
      [&](Oracle& oracle, std::size_t i) {
        SampleOutcome s;
        s.predicted = Predict(ensemble, rows[i]);
        s.adversarial = Generate(oracle, classes, rows[i], options.attack);
        if (s.adversarial) {
          s.adversarial->instance = static_cast<int>(i);
          s.detection = Detect(oracle, classes, s.adversarial->perturbed, options.attack.order,
                               options.min_frequency);
        }
        if (options.include_clean)
          s.clean_detection =
              Detect(oracle, classes, rows[i], options.attack.order, options.min_frequency);
        return s;
      });

  const int labels = ensemble.num_labels();
  report.total = static_cast<int>(rows.size());
  report.class_totals.assign(labels, 0);
  report.class_flipped.assign(labels, 0);
  report.flip_matrix.assign(labels, std::vector<int>(labels, 0));
  double l2_sum = 0.0;
  for (const SampleOutcome& s : report.samples) {
    ++report.class_totals[s.predicted];
    if (s.clean_detection && ClassifyAdversarial(*s.clean_detection, options.tau))
      ++report.clean_flagged;
    if (!s.adversarial) continue;
    const AdvResult& adv = *s.adversarial;
    if (Predict(ensemble, adv.perturbed) == adv.original_class)
      throw Error("adversarial sample does not change the prediction");
    ++report.fooled;
    ++report.class_flipped[adv.original_class];
    ++report.flip_matrix[adv.original_class][adv.new_class];
    l2_sum += adv.l2;
    if (ClassifyAdversarial(*s.detection, options.tau)) ++report.detected;
  }
  report.fooled_rate = static_cast<double>(report.fooled) / static_cast<double>(report.total);
  if (report.fooled > 0) {
    report.mean_l2 = l2_sum / static_cast<double>(report.fooled);
    report.detection_rate =
        static_cast<double>(report.detected) / static_cast<double>(report.fooled);
  }
  if (options.include_clean)
    report.false_positive_rate =
        static_cast<double>(report.clean_flagged) / static_cast<double>(report.total);
  return report;
}

nlohmann::ordered_json AttackReportToJson(const AttackReport& report,
                                          const AttackEvalOptions& options) {
  nlohmann::ordered_json j;
  j["mode"] = options.attack.mode == AttackMode::kInterval ? "interval" : "witness";
  j["tau"] = options.tau;
  j["total"] = report.total;
  j["fooled"] = report.fooled;
  j["fooled_rate"] = report.fooled_rate;
  j["mean_l2"] = report.mean_l2;
  auto& per_class = j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.class_totals.size(); ++c) {
    const int total = report.class_totals[c];
    per_class.push_back({{"class", c},
                         {"total", total},
                         {"flipped", report.class_flipped[c]},
                         {"flip_rate", total ? static_cast<double>(report.class_flipped[c]) / total
                                             : 0.0}});
  }
  j["flip_matrix"] = report.flip_matrix;
  j["detected"] = report.detected;
  j["detection_rate"] = report.detection_rate ? nlohmann::ordered_json(*report.detection_rate)
                                              : nlohmann::ordered_json(nullptr);
  if (options.include_clean) {
    j["clean_flagged"] = report.clean_flagged;
    j["false_positive_rate"] = *report.false_positive_rate;
  }
  return j;
}

std::string AttackSamplesCsv(const AttackReport& report, const FeatureSpace& features) {
  std::string out = "instance,original_class,new_class,l2,s_adv,changed";
  for (const auto& name : features.names()) out += ",orig_" + name;
  for (const auto& name : features.names()) out += ",adv_" + name;
  out += '\n';
  for (const SampleOutcome& s : report.samples) {
    if (!s.adversarial) continue;
    const AdvResult& a = *s.adversarial;
    out += std::to_string(a.instance) + ',' + std::to_string(a.original_class) + ',' +
           std::to_string(a.new_class) + ',' + FormatDouble(a.l2) + ',' +
           FormatDouble(s.detection->s_adv) + ',';
    for (std::size_t k = 0; k < a.changed.size(); ++k) {
      if (k) out += ';';
      out += features.name(a.changed[k]);
    }
    for (double v : a.original) out += ',' + FormatDouble(v);
    for (double v : a.perturbed) out += ',' + FormatDouble(v);
    out += '\n';
  }
  return out;
}

}  // namespace gbtx
