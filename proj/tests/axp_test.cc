#include "gbtx/axp.h"

#include <string>
#include <vector>

#include "gbtx/error.h"
#include "gbtx/refcheck.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace gbtx {
namespace {

using testing::Conjunction;
using testing::Share;
using testing::Toy2F;

TEST(AxpTest, ToyKeepsOnlyF0) {
  const EncodedModel enc = EncodeEnsemble(Toy2F());
  Oracle oracle(enc);
  const Explanation e = ExtractAxp(oracle, std::vector<double>{1.0, 3.0}, OrderPolicy::kIndex);
  EXPECT_EQ(e.predicted, 1);
  EXPECT_EQ(e.kept, (std::vector<std::pair<int, double>>{{0, 1.0}}));
  EXPECT_EQ(e.free, (std::vector<int>{1}));
  EXPECT_TRUE(e.Keeps(0));
  EXPECT_FALSE(e.Keeps(1));
}

TEST(AxpTest, ConjunctionNeedsBothFeatures) {
  const EncodedModel enc = EncodeEnsemble(Conjunction());
  Oracle oracle(enc);
  const Explanation e = ExtractAxp(oracle, std::vector<double>{1.0, 1.0}, OrderPolicy::kIndex);
  EXPECT_EQ(e.predicted, 1);
  EXPECT_EQ(e.kept.size(), 2u);
  EXPECT_TRUE(e.free.empty());
}

TEST(AxpTest, ConstantModelHasEmptyExplanation) {
  Ensemble m;
  m.features = FeatureSpace({"a", "b"});
  m.trees.push_back(Tree{{Node::Leaf(1.0)}, 0, 0});
  Validate(m);
  const EncodedModel enc = EncodeEnsemble(Share(m));
  Oracle oracle(enc);
  const Explanation e = ExtractAxp(oracle, std::vector<double>{0.0, 0.0}, OrderPolicy::kIndex);
  EXPECT_TRUE(e.kept.empty());
  EXPECT_EQ(e.free, (std::vector<int>{0, 1}));
}

TEST(AxpTest, MarginOrderOnToy) {
  const EncodedModel enc = EncodeEnsemble(Toy2F());
  // Distances: f0 -> 0.5 (to either threshold), f1 -> 1.0.
  EXPECT_EQ(FeatureOrder(enc, std::vector<double>{1.0, 3.0}, OrderPolicy::kMargin),
            (std::vector<int>{1, 0}));
  EXPECT_EQ(FeatureOrder(enc, std::vector<double>{1.0, 3.0}, OrderPolicy::kIndex),
            (std::vector<int>{0, 1}));
}

TEST(AxpTest, ThrowsWhenScoreRoundsOntoBoundary) {
  // raw = 1e-9 is class 1 but rounds to 0 at scale 1e6.
  Ensemble m;
  m.features = FeatureSpace({"a"});
  m.trees.push_back(Tree{{Node::Split(0, 0.0, 1, 2), Node::Leaf(1e-9), Node::Leaf(-1.0)}, 0, 0});
  Validate(m);
  const EncodedModel enc = EncodeEnsemble(Share(m));
  Oracle coarse(enc);
  EXPECT_THROW(ExtractAxp(coarse, std::vector<double>{-1.0}, OrderPolicy::kIndex), OracleError);
  Oracle fine(enc, 1'000'000'000'000);
  EXPECT_EQ(ExtractAxp(fine, std::vector<double>{-1.0}, OrderPolicy::kIndex).predicted, 1);
}

TEST(AxpTest, JsonShape) {
  const EncodedModel enc = EncodeEnsemble(Toy2F());
  Oracle oracle(enc);
  Explanation e = ExtractAxp(oracle, std::vector<double>{1.0, 3.0}, OrderPolicy::kIndex);
  e.instance = 0;
  EXPECT_EQ(ExplanationToJson(e, enc.ensemble->features).dump(),
            R"({"instance":0,"class":1,"kept":[{"feature":"f0","value":1.0}],"free":["f1"]})");
}

TEST(AxpTest, ParseOrderPolicy) {
  EXPECT_EQ(ParseOrderPolicy("index"), OrderPolicy::kIndex);
  EXPECT_EQ(ParseOrderPolicy("margin"), OrderPolicy::kMargin);
  EXPECT_THROW(ParseOrderPolicy("random"), UsageError);
}

// Sufficiency and subset-minimality, both checked by brute force.
TEST(AxpTest, RandomExplanationsAreSufficientAndMinimal) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    auto model = Share(refcheck::RandomSmallEnsemble(seed));
    const EncodedModel enc = EncodeEnsemble(model);
    Oracle oracle(enc);
    const Instance x = refcheck::RandomGridInstance(seed * 31 + 7, *model);
    for (OrderPolicy policy : {OrderPolicy::kIndex, OrderPolicy::kMargin}) {
      const Explanation e = ExtractAxp(oracle, x, policy);
      ASSERT_EQ(e.predicted, Predict(*model, x));
      std::vector<bool> fixed(model->num_features(), false);
      for (const auto& [f, v] : e.kept) {
        fixed[f] = true;
        ASSERT_EQ(v, x[f]);
      }
      ASSERT_EQ(e.kept.size() + e.free.size(), model->num_features());
      ASSERT_TRUE(refcheck::BruteEntails(*model, x, fixed, e.predicted)) << "seed " << seed;
      for (const auto& [f, v] : e.kept) {
        fixed[f] = false;
        ASSERT_FALSE(refcheck::BruteEntails(*model, x, fixed, e.predicted))
            << "seed " << seed << " feature " << f << " is redundant";
        fixed[f] = true;
      }
    }
  }
}

TEST(AxpTest, Deterministic) {
  auto model = Share(refcheck::RandomSmallEnsemble(5));
  const EncodedModel enc = EncodeEnsemble(model);
  Oracle a(enc), b(enc);
  const Instance x = refcheck::RandomGridInstance(5, *model);
  EXPECT_EQ(ExtractAxp(a, x, OrderPolicy::kMargin), ExtractAxp(b, x, OrderPolicy::kMargin));
}

}  // namespace
}  // namespace gbtx
