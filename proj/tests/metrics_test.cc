#include "gbtx/metrics.h"

#include <cmath>
#include <random>
#include <vector>

#include "gbtx/error.h"
#include "gtest/gtest.h"
#include "metric_oracles.h"

namespace gbtx {
namespace {

using testing::CountingRanks;
using testing::KendallOracle;
using testing::PearsonOracle;
using testing::RboOracle;

TEST(RankingTest, MakeRankingDensifies) {
  const Ranking r = MakeRanking(std::vector<int>{5, 2, 2, 9});
  EXPECT_EQ(r.ranks, (std::vector<int>{2, 1, 1, 3}));
  EXPECT_EQ(r.order, (std::vector<int>{1, 2, 0, 3}));
  EXPECT_THROW(MakeRanking(std::vector<int>{0, 1}), SchemaError);
}

TEST(RankingTest, FromOrder) {
  const Ranking r = RankingFromOrder(std::vector<int>{2, 0, 1});
  EXPECT_EQ(r.ranks, (std::vector<int>{2, 3, 1}));
  EXPECT_THROW(RankingFromOrder(std::vector<int>{0, 0, 1}), SchemaError);
  EXPECT_THROW(RankingFromOrder(std::vector<int>{0, 3, 1}), SchemaError);
}

TEST(RankingTest, FormalRankingIsTwoLevel) {
  Explanation e;
  e.kept = {{2, 0.0}};
  const Ranking r = FormalRanking(e, 4);
  EXPECT_EQ(r.ranks, (std::vector<int>{2, 2, 1, 2}));
  EXPECT_EQ(r.order, (std::vector<int>{2, 0, 1, 3}));
}

TEST(RankingTest, FractionalRanks) {
  EXPECT_EQ(FractionalRanks(std::vector<int>{1, 2, 2}), (std::vector<double>{1, 2.5, 2.5}));
  EXPECT_EQ(FractionalRanks(std::vector<int>{3, 1, 3, 3}), (std::vector<double>{3, 1, 3, 3}));
}

TEST(CorrelationTest, IdenticalAndReversed) {
  const Ranking a = RankingFromOrder(std::vector<int>{0, 1, 2, 3, 4});
  const Ranking rev = RankingFromOrder(std::vector<int>{4, 3, 2, 1, 0});
  EXPECT_EQ(Spearman(a, a), 1.0);
  EXPECT_EQ(KendallTauB(a, a), 1.0);
  EXPECT_EQ(Rbo(a.order, a.order), 1.0);
  EXPECT_EQ(Spearman(a, rev), -1.0);
  EXPECT_EQ(KendallTauB(a, rev), -1.0);
  const Ranking tied = MakeRanking(std::vector<int>{1, 2, 2, 1, 3});
  EXPECT_EQ(Spearman(tied, tied), 1.0);
  EXPECT_EQ(KendallTauB(tied, tied), 1.0);
}

TEST(CorrelationTest, TwoLevelAgainstStrict) {
  const Ranking formal = MakeRanking(std::vector<int>{1, 2, 2});
  const Ranking scores = MakeRanking(std::vector<int>{1, 2, 3});
  const auto expected = PearsonOracle(CountingRanks({1, 2, 2}), CountingRanks({1, 2, 3}));
  ASSERT_TRUE(expected.has_value());
  EXPECT_NEAR(*Spearman(formal, scores), *expected, 1e-15);
  EXPECT_NEAR(*Spearman(formal, scores), std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(CorrelationTest, KendallPairScanExample) {
  // Pairs: (0,1) discordant, (0,2) tied in b, (1,2) tied in a.
  const Ranking a = MakeRanking(std::vector<int>{1, 2, 2});
  const Ranking b = MakeRanking(std::vector<int>{2, 1, 2});
  const auto expected = KendallOracle({1, 2, 2}, {2, 1, 2});
  EXPECT_NEAR(*KendallTauB(a, b), *expected, 1e-15);
  EXPECT_DOUBLE_EQ(*expected, -0.5);
}

TEST(CorrelationTest, DegenerateIsNullopt) {
  const Ranking flat = MakeRanking(std::vector<int>{1, 1, 1});
  const Ranking strict = MakeRanking(std::vector<int>{1, 2, 3});
  EXPECT_FALSE(Spearman(flat, strict).has_value());
  EXPECT_FALSE(KendallTauB(flat, strict).has_value());
  EXPECT_THROW(Spearman(flat, MakeRanking(std::vector<int>{1, 2})), SchemaError);
}

TEST(CorrelationTest, RandomTieHeavyRankingsMatchOracles) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + rng() % 14;
    const int levels = 1 + static_cast<int>(rng() % 4);
    std::vector<int> ra(n), rb(n);
    for (std::size_t i = 0; i < n; ++i) {
      ra[i] = 1 + static_cast<int>(rng() % levels);
      rb[i] = 1 + static_cast<int>(rng() % levels);
    }
    const Ranking a = MakeRanking(ra), b = MakeRanking(rb);
    const auto s = Spearman(a, b);
    const auto s_oracle = PearsonOracle(CountingRanks(ra), CountingRanks(rb));
    ASSERT_EQ(s.has_value(), s_oracle.has_value()) << "round " << round;
    if (s) EXPECT_NEAR(*s, *s_oracle, 1e-12);
    const auto k = KendallTauB(a, b);
    const auto k_oracle = KendallOracle(ra, rb);
    ASSERT_EQ(k.has_value(), k_oracle.has_value()) << "round " << round;
    if (k) EXPECT_NEAR(*k, *k_oracle, 1e-12);
    for (double p : {0.5, 0.9, 0.98})
      EXPECT_NEAR(Rbo(a.order, b.order, p), RboOracle(a.order, b.order, p), 1e-12);
  }
}

TEST(RboTest, SwappedHead) {
  const std::vector<int> a = {0, 1, 2}, b = {1, 0, 2};
  EXPECT_NEAR(Rbo(a, b, 0.9), RboOracle(a, b, 0.9), 1e-15);
  EXPECT_NEAR(Rbo(a, b, 0.9), 0.9, 1e-15);
}

TEST(RboTest, RejectsBadInput) {
  const std::vector<int> a = {0, 1, 2};
  EXPECT_THROW(Rbo(a, std::vector<int>{0, 1}), SchemaError);
  EXPECT_THROW(Rbo(a, a, 1.0), UsageError);
  EXPECT_THROW(Rbo(a, a, 0.0), UsageError);
}

TEST(RboTest, DisjointPrefixesStayPositive) {
  // Full lists share every item, so the tail still contributes.
  const std::vector<int> a = {0, 1, 2, 3}, b = {3, 2, 1, 0};
  EXPECT_NEAR(Rbo(a, b, 0.9), RboOracle(a, b, 0.9), 1e-15);
  EXPECT_GT(Rbo(a, b, 0.9), 0.0);
}

TEST(ConsistencyTest, FractionOfIdenticalRankings) {
  const Ranking a = MakeRanking(std::vector<int>{1, 2}), b = MakeRanking(std::vector<int>{2, 1});
  EXPECT_EQ(Consistency(std::vector<Ranking>{a, b}, std::vector<Ranking>{a, b}), 1.0);
  EXPECT_EQ(Consistency(std::vector<Ranking>{a, b}, std::vector<Ranking>{a, a}), 0.5);
  EXPECT_THROW(Consistency(std::vector<Ranking>{a}, std::vector<Ranking>{}), SchemaError);
}

TEST(ReportTest, CsvAndAggregates) {
  std::vector<InstanceMetrics> rows = {{0, 0.5, 0.25, 0.75}, {3, std::nullopt, std::nullopt, 1.0}};
  EXPECT_EQ(MetricsCsv(rows),
            "instance,spearman,kendall,rbo\n"
            "0,0.5,0.25,0.75\n"
            "3,degenerate,degenerate,1\n"
            "min,0.5,0.25,0.75\n"
            "avg,0.5,0.25,0.875\n"
            "max,0.5,0.25,1\n");
}

}  // namespace
}  // namespace gbtx
