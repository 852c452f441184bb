#include "gbtx/class_explanation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gbtx/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace gbtx {
namespace {

using testing::Fixture;
using testing::Toy2F;

// Quantile by 1-based position 1 + (n-1)p, as in the usual "type 7" rule.
double QuantileOracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = 1.0 + (static_cast<double>(v.size()) - 1.0) * p;
  const auto j = static_cast<std::size_t>(pos);
  const double g = pos - static_cast<double>(j);
  if (j >= v.size()) return v.back();
  return v[j - 1] + g * (v[j] - v[j - 1]);
}

TEST(IntervalTest, QuantileOfOneToHundred) {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  const Interval in = IntervalOf(v, IntervalOptions{IntervalMethod::kQuantile, 0.05});
  EXPECT_DOUBLE_EQ(in.lo, QuantileOracle(v, 0.05));
  EXPECT_DOUBLE_EQ(in.hi, QuantileOracle(v, 0.95));
  EXPECT_NEAR(in.lo, 5.95, 1e-12);
  EXPECT_NEAR(in.hi, 95.05, 1e-12);
}

TEST(IntervalTest, QuantileAgreesWithOracleOnRandomData) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> v(1 + rng() % 40);
    for (double& x : v) x = std::round(u(rng) * 4.0) / 4.0;  // plenty of ties
    const double alpha = 0.01 * static_cast<double>(1 + rng() % 40);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const Interval in = IntervalOf(v, IntervalOptions{IntervalMethod::kQuantile, alpha});
    EXPECT_NEAR(in.lo, QuantileOracle(v, alpha), 1e-12);
    EXPECT_NEAR(in.hi, QuantileOracle(v, 1.0 - alpha), 1e-12);
    EXPECT_LE(in.lo, in.hi);
  }
}

TEST(IntervalTest, ClusterPicksLargerGroup) {
  const std::vector<double> v = {0, 0, 0, 0, 0, 100};
  EXPECT_EQ(IntervalOf(v, IntervalOptions{IntervalMethod::kCluster}), (Interval{0, 0}));
}

TEST(IntervalTest, ConstantValues) {
  const std::vector<double> v = {2.5, 2.5, 2.5};
  EXPECT_EQ(IntervalOf(v, IntervalOptions{IntervalMethod::kCluster}), (Interval{2.5, 2.5}));
  EXPECT_EQ(IntervalOf(v, IntervalOptions{IntervalMethod::kQuantile}), (Interval{2.5, 2.5}));
  EXPECT_THROW(IntervalOf(std::vector<double>{}, IntervalOptions{}), SchemaError);
}

TEST(IntervalTest, ClusterEqualSizesGoToLowerMedian) {
  const std::vector<double> v = {1, 2, 10, 11};
  EXPECT_EQ(IntervalOf(v, IntervalOptions{IntervalMethod::kCluster}), (Interval{1, 2}));
}

double Sse(const std::vector<double>& c) {
  double mean = 0;
  for (double x : c) mean += x;
  mean /= static_cast<double>(c.size());
  double s = 0;
  for (double x : c) s += (x - mean) * (x - mean);
  return s;
}

// Optimal 2-means over every one of the 2^n bipartitions.
Interval ClusterOracle(const std::vector<double>& v) {
  const std::size_t n = v.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_a, best_b;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b).push_back(v[i]);
    const double cost = Sse(a) + Sse(b);
    if (cost < best) {
      best = cost;
      best_a = a;
      best_b = b;
    }
  }
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[(n - 1) / 2];
  const std::vector<double>* pick = &best_a;
  if (best_b.size() > best_a.size()) pick = &best_b;
  if (best_a.size() == best_b.size() &&
      std::find(best_b.begin(), best_b.end(), median) != best_b.end())
    pick = &best_b;
  return Interval{*std::min_element(pick->begin(), pick->end()),
                  *std::max_element(pick->begin(), pick->end())};
}

TEST(IntervalTest, ClusterMatchesExhaustiveTwoMeans) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int round = 0; round < 300; ++round) {
    std::vector<double> v(2 + rng() % 10);
    for (double& x : v) x = u(rng);
    EXPECT_EQ(IntervalOf(v, IntervalOptions{IntervalMethod::kCluster}), ClusterOracle(v))
        << "round " << round;
  }
}

Explanation Expl(int cls, std::vector<std::pair<int, double>> kept, std::vector<int> free) {
  Explanation e;
  e.predicted = cls;
  e.kept = std::move(kept);
  e.free = std::move(free);
  return e;
}

TEST(AggregateTest, UnionPerClass) {
  const std::vector<Explanation> ex = {Expl(1, {{0, 1.0}}, {1}), Expl(1, {{0, 1.2}}, {1}),
                                       Expl(1, {{0, 0.9}, {1, 2.5}}, {})};
  const auto classes = AggregateClassExplanations(2, ex, IntervalOptions{});
  ASSERT_EQ(classes.size(), 2u);
  EXPECT_TRUE(classes[0].empty());
  EXPECT_EQ(classes[0].population, 0);
  const ClassExplanation& c1 = classes[1];
  EXPECT_EQ(c1.population, 3);
  ASSERT_EQ(c1.features.size(), 2u);
  EXPECT_EQ(c1.features[0].feature, 0);
  EXPECT_EQ(c1.features[0].support, 3);
  EXPECT_DOUBLE_EQ(c1.features[0].frequency, 1.0);
  EXPECT_NEAR(c1.features[0].interval.lo, QuantileOracle({0.9, 1.0, 1.2}, 0.05), 1e-15);
  EXPECT_NEAR(c1.features[0].interval.hi, QuantileOracle({0.9, 1.0, 1.2}, 0.95), 1e-15);
  EXPECT_EQ(c1.features[1].feature, 1);
  EXPECT_EQ(c1.features[1].support, 1);
  EXPECT_DOUBLE_EQ(c1.features[1].frequency, 1.0 / 3.0);
  EXPECT_EQ(c1.features[1].interval, (Interval{2.5, 2.5}));
  ASSERT_NE(c1.Find(1), nullptr);
}

TEST(AggregateTest, JsonRoundTrip) {
  const std::vector<Explanation> ex = {Expl(1, {{0, 1.0}}, {1}), Expl(0, {{0, 0.1}, {1, 0.3}}, {})};
  const auto classes = AggregateClassExplanations(2, ex, IntervalOptions{});
  const FeatureSpace fs({"f0", "f1"});
  const std::string text = ClassExplanationsToJson(classes, fs).dump(2);
  EXPECT_EQ(ClassExplanationsFromJson(text, fs), classes);
  EXPECT_THROW(ClassExplanationsFromJson("[{\"class\":0}]", fs), SchemaError);
  EXPECT_THROW(ClassExplanationsFromJson("{}", fs), SchemaError);
}

TEST(AggregateTest, ToyDataset) {
  auto toy = Toy2F();
  const EncodedModel enc = EncodeEnsemble(toy);
  const Dataset data = LoadCsv(Fixture("toy2f.csv"), toy->features);
  const auto classes = BuildClassExplanations(enc, data, ClassExplainOptions{});
  ASSERT_EQ(classes.size(), 2u);
  EXPECT_EQ(classes[0].population, 2);
  EXPECT_EQ(classes[1].population, 1);
  ASSERT_EQ(classes[1].features.size(), 1u);
  EXPECT_EQ(classes[1].features[0].interval, (Interval{1.0, 1.0}));
  ASSERT_EQ(classes[0].features.size(), 2u);
  EXPECT_EQ(classes[0].features[0].support, 2);
  EXPECT_EQ(classes[0].features[1].support, 1);
}

TEST(AggregateTest, ParallelExplainMatchesSerial) {
  auto model = testing::LoadShared("synth_lgbm.txt", ModelFormat::kLightGbm);
  const EncodedModel enc = EncodeEnsemble(model);
  const Dataset data = LoadCsv(Fixture("synth_test.csv"), model->features);
  const auto serial = ExplainAll(enc, data.rows, OrderPolicy::kIndex, kDefaultScale, 1);
  const auto parallel = ExplainAll(enc, data.rows, OrderPolicy::kIndex, kDefaultScale, 4);
  EXPECT_EQ(serial, parallel);
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i].instance, static_cast<int>(i));
}

TEST(AggregateTest, ParseIntervalMethod) {
  EXPECT_EQ(ParseIntervalMethod("quantile"), IntervalMethod::kQuantile);
  EXPECT_EQ(ParseIntervalMethod("cluster"), IntervalMethod::kCluster);
  EXPECT_THROW(ParseIntervalMethod("kde"), UsageError);
}

}  // namespace
}  // namespace gbtx
