#ifndef GBTX_ADVERSARIAL_H_
#define GBTX_ADVERSARIAL_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbtx/class_explanation.h"
#include "json.hpp"

namespace gbtx {

enum class FeatureFlag { kOk, kMissingFromClass, kOutsideInterval };

const char* FeatureFlagName(FeatureFlag flag);

struct DetectionResult {
  int predicted = 0;
  // Adversarial likelihood d / n; 0 for an empty explanation.
  double s_adv = 0.0;
  int discrepancies = 0;
  int explained = 0;
  // One entry per kept feature of the input's explanation.
  std::vector<std::pair<int, FeatureFlag>> flags;
  bool empty_explanation = false;
  bool empty_class = false;
};

// Compares an explanation with the class-level explanation of its predicted
// class. Class features with frequency below `min_frequency` are treated as
// absent.
DetectionResult DetectFromExplanation(const Explanation& explanation,
                                      std::span<const ClassExplanation> classes,
                                      double min_frequency = 0.0);

DetectionResult Detect(Oracle& oracle, std::span<const ClassExplanation> classes,
                       std::span<const double> x, OrderPolicy order = OrderPolicy::kIndex,
                       double min_frequency = 0.0);

inline constexpr double kDefaultTau = 0.5;

// True iff s_adv >= tau.
bool ClassifyAdversarial(const DetectionResult& result, double tau = kDefaultTau);

enum class AttackMode { kInterval, kWitness };

AttackMode ParseAttackMode(const std::string& name);

struct AttackOptions {
  AttackMode mode = AttackMode::kInterval;
  OrderPolicy order = OrderPolicy::kIndex;
  // Retry with every feature perturbable when the explanation's features
  // alone cannot flip the prediction.
  bool full_free_fallback = false;
};

struct AdvResult {
  int instance = -1;
  Instance original;
  Instance perturbed;
  int original_class = 0;
  int new_class = 0;
  // Rival class whose intervals (or gap query) produced the flip.
  int rival = 0;
  double l2 = 0.0;
  std::vector<int> changed;
  // L2 before reverting and after each accepted reversion.
  std::vector<double> reversion_trace;
};

double L2Distance(std::span<const double> a, std::span<const double> b);

std::optional<AdvResult> Generate(Oracle& oracle, std::span<const ClassExplanation> classes,
                                  std::span<const double> x, const AttackOptions& options = {});

struct AttackEvalOptions {
  AttackOptions attack;
  double tau = kDefaultTau;
  double min_frequency = 0.0;
  // Also score the unmodified inputs, for a false-positive rate.
  bool include_clean = false;
  std::int64_t scale = kDefaultScale;
  int jobs = 1;
};

struct SampleOutcome {
  int predicted = 0;
  std::optional<AdvResult> adversarial;
  std::optional<DetectionResult> detection;  // on the adversarial sample
  std::optional<DetectionResult> clean_detection;
};

struct AttackReport {
  int total = 0;
  int fooled = 0;
  double fooled_rate = 0.0;
  double mean_l2 = 0.0;
  std::vector<int> class_totals;
  std::vector<int> class_flipped;
  // flip_matrix[original][new] over successful attacks.
  std::vector<std::vector<int>> flip_matrix;
  int detected = 0;
  std::optional<double> detection_rate;
  int clean_flagged = 0;
  std::optional<double> false_positive_rate;
  std::vector<SampleOutcome> samples;
};

AttackReport EvaluateAttack(const EncodedModel& encoded,
                            std::span<const ClassExplanation> classes,
                            std::span<const Instance> rows, const AttackEvalOptions& options);

nlohmann::ordered_json AttackReportToJson(const AttackReport& report,
                                          const AttackEvalOptions& options);

// Per-sample CSV of successful attacks: instance, classes, L2, s_adv, the
// changed features and the original and perturbed vectors.
std::string AttackSamplesCsv(const AttackReport& report, const FeatureSpace& features);

}  // namespace gbtx

#endif  // GBTX_ADVERSARIAL_H_
