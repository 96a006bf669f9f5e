// Copyright 2026 The SLHF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slhf/preference.h"

#include <cmath>

#include "gtest/gtest.h"
#include "slhf/cycles.h"
#include "slhf/error.h"
#include "test_util.h"

namespace slhf {
namespace {

const ActionSpace kAbc = ActionSpace::SingleContext({"A", "B", "C"});

double Logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

TEST(ActionSpaceTest, RejectsBadInputs) {
  EXPECT_THROW(ActionSpace({"x"}, {{"A"}}, {1.0}), ValidationError);
  EXPECT_THROW(ActionSpace({"x"}, {{"A", "A"}}, {1.0}), ValidationError);
  EXPECT_THROW(ActionSpace({"x", "y"}, {{"A", "B"}, {"A", "B"}}, {0.5, 0.6}),
               ValidationError);
  EXPECT_THROW(ActionSpace({"x", "y"}, {{"A", "B"}, {"A", "B"}}, {1.2, -0.2}),
               ValidationError);
  EXPECT_THROW(ActionSpace({"x", "x"}, {{"A", "B"}, {"A", "B"}}, {0.5, 0.5}),
               ValidationError);
  EXPECT_NO_THROW(ActionSpace({"x", "y"}, {{"A", "B"}, {"P", "Q", "R"}},
                              {0.25, 0.75}));
}

TEST(ActionSpaceTest, Lookup) {
  const ActionSpace space({"x", "y"}, {{"A", "B"}, {"P", "Q", "R"}},
                          {0.25, 0.75});
  EXPECT_EQ(space.ContextIndex("y"), 1);
  EXPECT_EQ(space.ActionIndex(1, "R"), 2);
  EXPECT_FALSE(space.FindAction(0, "R").has_value());
  EXPECT_THROW(space.ActionIndex(0, "R"), ValidationError);
  EXPECT_FALSE(space.HasUniformSize());
  EXPECT_EQ(DefaultActionLabels(3), (std::vector<std::string>{"A", "B", "C"}));
}

TEST(AggregatePopulationTest, EqualWeightsGiveTheCycle) {
  const auto p = AggregatePopulation(
      AnnotatorPopulation::Condorcet(1.0 / 3, 1.0 / 3, 1.0 / 3), kAbc);
  EXPECT_NEAR(p(0, 0, 1), 2.0 / 3, 1e-12);  // A over B
  EXPECT_NEAR(p(0, 1, 2), 2.0 / 3, 1e-12);  // B over C
  EXPECT_NEAR(p(0, 2, 0), 2.0 / 3, 1e-12);  // C over A
  for (int i = 0; i < 3; ++i) EXPECT_EQ(p(0, i, i), 0.5);
}

TEST(AggregatePopulationTest, SingleTypeIsTransitive) {
  const auto p = AggregatePopulation(AnnotatorPopulation::Condorcet(1, 0, 0),
                                     kAbc);
  EXPECT_EQ(p(0, 0, 1), 1.0);
  EXPECT_EQ(p(0, 1, 2), 1.0);
  EXPECT_EQ(p(0, 0, 2), 1.0);
}

TEST(AggregatePopulationTest, SymbolicEntries) {
  const auto p = AggregatePopulation(
      AnnotatorPopulation::Condorcet(0.5, 0.3, 0.2), kAbc);
  EXPECT_NEAR(p(0, 0, 1), 0.7, 1e-12);
  EXPECT_NEAR(p(0, 1, 2), 0.8, 1e-12);
  EXPECT_NEAR(p(0, 2, 0), 0.5, 1e-12);
}

TEST(AggregatePopulationTest, RejectsInvalidPopulations) {
  EXPECT_THROW(AnnotatorPopulation({{"A", "B", "A"}}, {1.0}), ValidationError);
  EXPECT_THROW(AnnotatorPopulation({{"A", "B"}}, {0.9}), ValidationError);
  EXPECT_THROW(AnnotatorPopulation({{"A", "B"}, {"B", "A"}}, {1.5, -0.5}),
               ValidationError);
  const AnnotatorPopulation missing({{"A", "B", "D"}}, {1.0});
  EXPECT_THROW(AggregatePopulation(missing, kAbc), ValidationError);
}

TEST(AggregatePopulationTest, ComplementarityAndAffinity) {
  Rng rng(7);
  const std::vector<std::vector<std::string>> rankings = {
      {"A", "B", "C", "D"}, {"D", "C", "B", "A"}, {"B", "D", "A", "C"}};
  const auto space = ActionSpace::SingleContext({"A", "B", "C", "D"});
  for (int trial = 0; trial < 50; ++trial) {
    const auto w1 = testing::RandomSimplex(3, rng);
    const auto w2 = testing::RandomSimplex(3, rng);
    const auto p1 = AggregatePopulation(AnnotatorPopulation(rankings, w1), space);
    const auto p2 = AggregatePopulation(AnnotatorPopulation(rankings, w2), space);
    std::vector<std::vector<std::string>> both = rankings;
    both.insert(both.end(), rankings.begin(), rankings.end());
    std::vector<double> half;
    for (double w : w1) half.push_back(0.5 * w);
    for (double w : w2) half.push_back(0.5 * w);
    const auto mix = AggregatePopulation(AnnotatorPopulation(both, half), space);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(p1(0, i, j) + p1(0, j, i), 1.0, 1e-12);
        EXPECT_NEAR(mix(0, i, j), 0.5 * (p1(0, i, j) + p2(0, i, j)), 1e-12);
      }
    }
  }
}

TEST(PreferenceMatrixTest, ValidatesInvariants) {
  SquareMatrix m(2, 0.5);
  m(0, 1) = 0.7;
  m(1, 0) = 0.4;
  EXPECT_THROW(PreferenceMatrix(ActionSpace::SingleContext({"A", "B"}), {m}),
               ValidationError);
  m(1, 0) = 0.3;
  EXPECT_NO_THROW(PreferenceMatrix(ActionSpace::SingleContext({"A", "B"}), {m}));
  m(0, 0) = 0.6;
  EXPECT_THROW(PreferenceMatrix(ActionSpace::SingleContext({"A", "B"}), {m}),
               ValidationError);
}

TEST(BtPreferenceTest, Examples) {
  const auto ab = ActionSpace::SingleContext({"A", "B"});
  EXPECT_EQ(BtPreference(RewardTable({{0.0, 0.0}}), ab)(0, 0, 1), 0.5);
  EXPECT_NEAR(BtPreference(RewardTable({{1.0, 0.0}}), ab)(0, 0, 1), Logistic(1.0),
              1e-15);
  EXPECT_NEAR(Logistic(1.0), 0.731059, 1e-6);
  const auto shifted = BtPreference(RewardTable({{5.3, 3.1}}), ab);
  const auto base = BtPreference(RewardTable({{2.2, 0.0}}), ab);
  EXPECT_NEAR(shifted(0, 0, 1), base(0, 0, 1), 1e-12);
  EXPECT_THROW(RewardTable({{1.0, NAN}}), ValidationError);
}

TEST(BtPreferenceTest, NeverCyclic) {
  Rng rng(11);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    std::vector<double> r(n);
    for (double& v : r) v = normal(rng);
    const auto p = BtPreference(RewardTable({r}),
                                ActionSpace::SingleContext(DefaultActionLabels(n)));
    const auto report = CycleStats(p);
    EXPECT_EQ(report.cycle_count, 0);
    EXPECT_EQ(report.cyclic_fraction, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        EXPECT_NEAR(p(0, i, j) + p(0, j, i), 1.0, 1e-12);
      }
    }
  }
}

TEST(PolicyPreferenceTest, Examples) {
  const auto p = AggregatePopulation(
      AnnotatorPopulation::Condorcet(1.0 / 3, 1.0 / 3, 1.0 / 3), kAbc);
  const auto a = Policy::Deterministic(kAbc, {0});
  const auto b = Policy::Deterministic(kAbc, {1});
  EXPECT_NEAR(PolicyPreference(p, a, b).average, 2.0 / 3, 1e-12);
  // Column A of the cycle table: 0.5, 1/3, 2/3.
  EXPECT_NEAR(PolicyPreference(p, Policy::Uniform(kAbc), a).average,
              (0.5 + 1.0 / 3 + 2.0 / 3) / 3, 1e-12);
}

TEST(PolicyPreferenceTest, SelfPreferenceIsOneHalf) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = testing::RandomSpace(rng, 3, 5);
    const auto p = RandomPreferenceMatrix(space, rng);
    const auto pi = testing::RandomPolicy(space, rng);
    const auto result = PolicyPreference(p, pi, pi);
    EXPECT_NEAR(result.average, 0.5, 1e-12);
    for (double v : result.per_context) EXPECT_NEAR(v, 0.5, 1e-12);
    const auto other = testing::RandomPolicy(space, rng);
    EXPECT_NEAR(PolicyPreference(p, pi, other).average +
                    PolicyPreference(p, other, pi).average,
                1.0, 1e-12);
  }
}

TEST(PolicyPreferenceTest, ShapeMismatch) {
  const auto p = AggregatePopulation(
      AnnotatorPopulation::Condorcet(1.0 / 3, 1.0 / 3, 1.0 / 3), kAbc);
  const auto two = Policy::Uniform(ActionSpace::SingleContext({"A", "B"}));
  EXPECT_THROW(PolicyPreference(p, two, two), ValidationError);
}

TEST(CondorcetWinnerTest, Examples) {
  EXPECT_EQ(CondorcetWinner(AggregatePopulation(
                AnnotatorPopulation::Condorcet(1, 0, 0), kAbc))[0],
            0);
  EXPECT_FALSE(CondorcetWinner(AggregatePopulation(
                   AnnotatorPopulation::Condorcet(1.0 / 3, 1.0 / 3, 1.0 / 3),
                   kAbc))[0]
                   .has_value());
  EXPECT_EQ(CondorcetWinner(AggregatePopulation(
                AnnotatorPopulation::Condorcet(0.6, 0.2, 0.2), kAbc))[0],
            0);
  // p(C > A) = 1 - a1 = 0.5 exactly: no strict winner.
  EXPECT_FALSE(CondorcetWinner(AggregatePopulation(
                   AnnotatorPopulation::Condorcet(0.5, 0.25, 0.25), kAbc))[0]
                   .has_value());
}

TEST(RandomPreferenceMatrixTest, IsValid) {
  Rng rng(5);
  const auto space = ActionSpace::Shared(3, DefaultActionLabels(5));
  const auto p = RandomPreferenceMatrix(space, rng);
  for (int x = 0; x < 3; ++x) {
    for (int i = 0; i < 5; ++i) {
      EXPECT_EQ(p(x, i, i), 0.5);
      for (int j = 0; j < 5; ++j) EXPECT_NEAR(p(x, i, j) + p(x, j, i), 1.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace slhf
