#include "gbtx/encoder.h"

#include <set>
#include <string>
#include <vector>

#include "gbtx/refcheck.h"
#include "gbtx/sat_solver.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace gbtx {
namespace {

using testing::Share;
using testing::Toy2F;

TEST(EncoderTest, ToyThresholds) {
  const ThresholdMap tm = CollectThresholds(*Toy2F());
  ASSERT_EQ(tm.num_features(), 2u);
  EXPECT_EQ(std::vector<double>(tm.thresholds(0).begin(), tm.thresholds(0).end()),
            (std::vector<double>{0.5, 1.5}));
  EXPECT_EQ(std::vector<double>(tm.thresholds(1).begin(), tm.thresholds(1).end()),
            (std::vector<double>{2.0}));
  EXPECT_EQ(tm.num_atoms(), 3u);
  EXPECT_EQ(tm.var(0, 0), 1);
  EXPECT_EQ(tm.var(0, 1), 2);
  EXPECT_EQ(tm.var(1, 0), 3);
  EXPECT_EQ(tm.RankOf(0, 1.5), 1);
  EXPECT_EQ(tm.RankOf(0, 1.0), -1);
  EXPECT_EQ(tm.CellOf(0, 0.5), 0);
  EXPECT_EQ(tm.CellOf(0, 0.50001), 1);
  EXPECT_EQ(tm.CellOf(0, 99.0), 2);
}

TEST(EncoderTest, ToyTreeZeroPaths) {
  auto toy = Toy2F();
  const ThresholdMap tm = CollectThresholds(*toy);
  const auto paths = EncodeTree(toy->trees[0], 0, tm);
  ASSERT_EQ(paths.size(), 3u);
  const int f0_05 = tm.var(0, 0), f1_2 = tm.var(1, 0);
  EXPECT_EQ(paths[0].conditions, (std::vector<Lit>{f0_05}));
  EXPECT_DOUBLE_EQ(paths[0].value, -1.0);
  EXPECT_EQ(paths[1].conditions, (std::vector<Lit>{-f0_05, f1_2}));
  EXPECT_DOUBLE_EQ(paths[1].value, 0.5);
  EXPECT_EQ(paths[2].conditions, (std::vector<Lit>{-f0_05, -f1_2}));
  EXPECT_DOUBLE_EQ(paths[2].value, 2.0);
}

TEST(EncoderTest, ToyCounts) {
  const EncodedModel enc = EncodeEnsemble(Toy2F());
  EXPECT_EQ(enc.num_ordering_clauses, 1u);
  EXPECT_EQ(enc.paths.size(), 5u);
  EXPECT_EQ(enc.num_vars, 8);
  // ordering + per path (length + 1) + one at-least-one per tree
  EXPECT_EQ(enc.clauses.size(), 1u + (2 + 3 + 3) + (2 + 2) + 2u);
  // The ordering clause is "f0<=0.5 implies f0<=1.5".
  EXPECT_EQ(enc.clauses[0], (Clause{-1, 2}));
  SatSolver solver(enc.num_vars);
  for (const Clause& c : enc.clauses) solver.AddClause(c);
  EXPECT_TRUE(solver.Solve());
}

TEST(EncoderTest, ToyAssumptions) {
  const EncodedModel enc = EncodeEnsemble(Toy2F());
  const std::vector<double> x = {1.0, 3.0};
  EXPECT_EQ(InstanceToAssumptions(enc, x, std::vector<int>{0}), (std::vector<Lit>{-1, 2}));
  EXPECT_EQ(InstanceToAssumptions(enc, x, std::vector<int>{1}), (std::vector<Lit>{-3}));
  EXPECT_TRUE(InstanceToAssumptions(enc, x, std::vector<int>{}).empty());
}

TEST(EncoderTest, ToyAllFixedSelectsWalkedLeaves) {
  const EncodedModel enc = EncodeEnsemble(Toy2F());
  SatSolver solver(enc.num_vars);
  for (const Clause& c : enc.clauses) solver.AddClause(c);
  const auto assumptions = InstanceToAssumptions(enc, std::vector<double>{1.0, 3.0},
                                                 std::vector<int>{0, 1});
  ASSERT_TRUE(solver.Solve(assumptions));
  std::vector<double> selected;
  for (const PathEntry& p : enc.paths)
    if (solver.Value(p.var)) selected.push_back(p.value);
  EXPECT_EQ(selected, (std::vector<double>{2.0, 0.25}));
}

TEST(EncoderTest, ConstantModelHasNoAtoms) {
  Ensemble e;
  e.features = FeatureSpace({"x"});
  e.trees.push_back(Tree{{Node::Leaf(1.0)}, 0, 0});
  Validate(e);
  const EncodedModel enc = EncodeEnsemble(Share(e));
  EXPECT_EQ(enc.thresholds.num_atoms(), 0u);
  EXPECT_EQ(enc.num_vars, 1);
  // The empty path's definition and the tree's at-least-one clause coincide.
  EXPECT_EQ(enc.clauses, (std::vector<Clause>{{1}, {1}}));
}

TEST(EncoderTest, DimacsHeaderAndLabels) {
  const std::string text = ToDimacs(EncodeEnsemble(Toy2F()));
  EXPECT_NE(text.find("p cnf 8 15\n"), std::string::npos);
  EXPECT_NE(text.find("f0 <= 0.5"), std::string::npos);
  EXPECT_NE(text.find("-1 2 0\n"), std::string::npos);
}

// For each cell combination, the concrete assignment satisfies every clause,
// and fixing the atoms forces exactly the walked leaf in every tree.
void CheckCellEquivalence(const Ensemble& model) {
  const EncodedModel enc = EncodeEnsemble(Share(model));
  SatSolver solver(enc.num_vars);
  for (const Clause& c : enc.clauses) solver.AddClause(c);
  const auto grid = refcheck::EnumerateCells(refcheck::SplitThresholds(model));
  std::vector<int> all(model.num_features());
  for (std::size_t f = 0; f < all.size(); ++f) all[f] = static_cast<int>(f);
  const std::vector<bool> none(model.num_features(), false);
  std::size_t visited = 0;
  refcheck::ForEachCompletion(grid, Instance(model.num_features(), 0.0), none,
                              [&](const Instance& x) {
    ++visited;
    const auto atoms = InstanceToAssumptions(enc, x, all);
    std::vector<bool> assignment(enc.num_vars + 1, false);
    for (Lit a : atoms) assignment[VarOf(a)] = a > 0;
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      const int leaf = model.trees[t].Descend(x);
      for (const PathEntry& p : enc.TreePaths(static_cast<int>(t)))
        assignment[p.var] = p.leaf_node == leaf;
    }
    ASSERT_TRUE(SatisfiesAll(enc, assignment));
    for (const PathEntry& p : enc.paths) {
      std::vector<Lit> query = atoms;
      query.push_back(assignment[p.var] ? -p.var : p.var);
      ASSERT_FALSE(solver.Solve(query)) << "path " << p.var << " not forced";
    }
  });
  ASSERT_EQ(visited, grid.total);
  // Atom chains: any non-monotone pair of adjacent atoms is infeasible.
  for (std::size_t f = 0; f < enc.thresholds.num_features(); ++f) {
    const int k = static_cast<int>(enc.thresholds.thresholds(static_cast<int>(f)).size());
    for (int j = 0; j + 1 < k; ++j) {
      const std::vector<Lit> bad = {enc.thresholds.var(static_cast<int>(f), j),
                                    -enc.thresholds.var(static_cast<int>(f), j + 1)};
      ASSERT_FALSE(solver.Solve(bad));
    }
  }
}

TEST(EncoderTest, ToyCellEquivalence) { CheckCellEquivalence(*Toy2F()); }

TEST(EncoderTest, RandomModelsCellEquivalence) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    CheckCellEquivalence(refcheck::RandomSmallEnsemble(seed));
  }
}

TEST(EncoderTest, ClauseCountFormula) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Ensemble e = refcheck::RandomSmallEnsemble(seed);
    const EncodedModel enc = EncodeEnsemble(Share(e));
    std::size_t expected = 0;
    for (const auto& t : refcheck::SplitThresholds(e))
      expected += t.empty() ? 0 : t.size() - 1;
    for (const PathEntry& p : enc.paths) expected += p.conditions.size() + 1;
    expected += e.trees.size();
    EXPECT_EQ(enc.clauses.size(), expected) << "seed " << seed;
  }
}

}  // namespace
}  // namespace gbtx
