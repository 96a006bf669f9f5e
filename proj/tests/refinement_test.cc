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

#include "slhf/refinement.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gtest/gtest.h"
#include "slhf/error.h"
#include "test_util.h"

namespace slhf {
namespace {

const ActionSpace kAbc = ActionSpace::SingleContext({"A", "B", "C"});

// Cycle follower A -> C, B -> A, C -> B.
SamplingProcess CycleChain(Policy leader) {
  return SamplingProcess::Chain(std::move(leader),
                                ConditionalPolicy::Deterministic(kAbc, {{2, 0, 1}}));
}

TEST(HitProbabilityTest, UniformIid) {
  const auto iid = SamplingProcess::Iid(Policy::Uniform(kAbc));
  const auto target = TargetSpec::FromSets({{0}});
  EXPECT_NEAR(HitProbability(kAbc, iid, target, 1), 1.0 / 3, 1e-15);
  EXPECT_NEAR(HitProbability(kAbc, iid, target, 2), 5.0 / 9, 1e-15);
  EXPECT_NEAR(HitProbability(kAbc, iid, target, 3), 19.0 / 27, 1e-15);
}

TEST(HitProbabilityTest, CycleChain) {
  const auto chain = CycleChain(Policy::Uniform(kAbc));
  const auto target = TargetSpec::FromSets({{0}});
  EXPECT_NEAR(HitProbability(kAbc, chain, target, 1), 1.0 / 3, 1e-15);
  EXPECT_NEAR(HitProbability(kAbc, chain, target, 2), 2.0 / 3, 1e-15);
  EXPECT_NEAR(HitProbability(kAbc, chain, target, 3), 1.0, 1e-15);
  EXPECT_NEAR(HitProbability(kAbc, chain, target, 5), 1.0, 1e-15);
}

TEST(HitProbabilityTest, IidClosedFormAndMonotone) {
  Rng rng(163);
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = testing::RandomSpace(rng, 3, 6);
    const auto pi = testing::RandomPolicy(space, rng);
    const auto omega = testing::RandomConditional(space, rng);
    std::vector<std::vector<int>> sets;
    for (int x = 0; x < space.num_contexts(); ++x) {
      sets.push_back({static_cast<int>(rng() % space.num_actions(x))});
    }
    const auto target = TargetSpec::FromSets(sets);
    const auto iid = SamplingProcess::Iid(pi);
    const auto chain = SamplingProcess::Chain(pi, omega);
    double prev_iid = 0.0, prev_chain = 0.0;
    for (int n = 1; n <= 6; ++n) {
      const auto per = HitProbabilityPerContext(iid, target, n);
      for (int x = 0; x < space.num_contexts(); ++x) {
        EXPECT_NEAR(per[x], 1.0 - std::pow(1.0 - pi(x, sets[x][0]), n), 1e-12);
      }
      const double a = HitProbability(space, iid, target, n);
      const double b = HitProbability(space, chain, target, n);
      EXPECT_GE(a, prev_iid - 1e-15);
      EXPECT_GE(b, prev_chain - 1e-15);
      prev_iid = a;
      prev_chain = b;
    }
  }
}

TEST(HitProbabilityTest, FullCycleFollowerAlwaysHits) {
  Rng rng(167);
  for (int k = 2; k <= 7; ++k) {
    const auto space = ActionSpace::SingleContext(DefaultActionLabels(k));
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> next(k);
    for (int i = 0; i < k; ++i) next[order[i]] = order[(i + 1) % k];
    const auto chain = SamplingProcess::Chain(
        testing::RandomPolicy(space, rng),
        ConditionalPolicy::Deterministic(space, {next}));
    for (int t = 0; t < k; ++t) {
      EXPECT_NEAR(HitProbability(space, chain, TargetSpec::FromSets({{t}}), k), 1.0,
                  1e-12);
    }
  }
}

TEST(HitProbabilityTest, MonteCarloAgrees) {
  Rng rng(173);
  for (int trial = 0; trial < 20; ++trial) {
    const auto space = testing::RandomSpace(rng, 2, 4);
    const auto pi = testing::RandomPolicy(space, rng);
    const auto omega = testing::RandomConditional(space, rng);
    std::vector<std::vector<int>> sets;
    for (int x = 0; x < space.num_contexts(); ++x) sets.push_back({0});
    const auto target = TargetSpec::FromSets(sets);
    for (const auto& process :
         {SamplingProcess::Iid(pi), SamplingProcess::Chain(pi, omega)}) {
      const int n = 1 + trial % 4;
      const double exact = HitProbability(space, process, target, n);
      const auto mc = HitProbabilityMonteCarlo(space, process, target, n, 1000 + trial,
                                               20'000);
      EXPECT_EQ(mc.trials, 20'000);
      // Error bar from the exact value; the sample one collapses near 0 or 1.
      const double se = std::sqrt(exact * (1 - exact) / mc.trials);
      EXPECT_LE(std::abs(mc.value - exact), 4 * se + 1.0 / mc.trials);
    }
  }
}

TEST(HitProbabilityTest, Validation) {
  const auto iid = SamplingProcess::Iid(Policy::Uniform(kAbc));
  const auto target = TargetSpec::FromSets({{0}});
  EXPECT_THROW(HitProbability(kAbc, iid, target, 0), ValidationError);
  EXPECT_THROW(HitProbabilityMonteCarlo(kAbc, iid, target, 2, 1, 0), ValidationError);
  EXPECT_THROW(TargetSpec::FromSets({{}}), ValidationError);
  EXPECT_THROW(HitProbability(kAbc, iid, TargetSpec::FromSets({{5}}), 1),
               ValidationError);
}

TEST(SampleChainTest, Examples) {
  const auto chain = CycleChain(Policy::Deterministic(kAbc, {0}));
  for (uint64_t seed : {1u, 2u, 99u}) {
    const auto c = SampleChain(chain, 0, 5, seed);
    EXPECT_EQ(c.actions, (std::vector<int>{0, 2, 1, 0, 2}));
    EXPECT_EQ(c.seed, seed);
  }
  EXPECT_EQ(SampleChain(chain, 0, 1, 5).actions.size(), 1u);
  EXPECT_THROW(SampleChain(chain, 0, 0, 5), ValidationError);
}

TEST(SampleChainTest, SecondStepLaw) {
  Rng rng(179);
  const auto pi = testing::RandomPolicy(kAbc, rng);
  const auto omega = testing::RandomConditional(kAbc, rng);
  const auto chain = SamplingProcess::Chain(pi, omega);
  const int draws = 100'000;
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < draws; ++i) counts[SampleChain(chain, 0, 2, i).actions[1]] += 1;
  for (int r = 0; r < 3; ++r) {
    double expected = 0.0;
    for (int y = 0; y < 3; ++y) expected += pi(0, y) * omega(0, y, r);
    const double se = std::sqrt(expected * (1 - expected) / draws);
    EXPECT_LE(std::abs(counts[r] / draws - expected), 4 * se);
  }
}

TEST(BestOfNTest, Value) {
  const RewardTable r({{3.0, 1.0, 2.0}});
  EXPECT_EQ(BestOfNValue(r, 0, std::vector<int>{1}), 1.0);
  EXPECT_EQ(BestOfNValue(r, 0, std::vector<int>{1, 2}), 2.0);
  EXPECT_EQ(BestOfNValue(r, 0, std::vector<int>{2, 0, 1}), 3.0);
  EXPECT_THROW(BestOfNValue(r, 0, std::vector<int>{}), ValidationError);
}

// Enumerates both sides' sample sequences.
double BruteForceBon(const ActionSpace& space, const SamplingProcess& a,
                     const SamplingProcess& b, const RewardTable& r, int n) {
  double total = 0.0;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int k = space.num_actions(x);
    std::vector<std::pair<double, double>> law_a, law_b;  // (max, prob)
    auto walk = [&](const SamplingProcess& s, auto& out) {
      int combos = 1;
      for (int i = 0; i < n; ++i) combos *= k;
      for (int code = 0; code < combos; ++code) {
        double prob = 1.0, best = -1e300;
        int rest = code, prev = -1;
        for (int i = 0; i < n; ++i) {
          const int y = rest % k;
          rest /= k;
          prob *= (i == 0 ? s.leader()[x] : s.Next(x, prev))[y];
          best = std::max(best, r(x, y));
          prev = y;
        }
        out.push_back({best, prob});
      }
    };
    walk(a, law_a);
    walk(b, law_b);
    double context = 0.0;
    for (const auto& [ma, pa] : law_a) {
      for (const auto& [mb, pb] : law_b) {
        if (ma >= mb) context += pa * pb;
      }
    }
    total += space.context_prob(x) * context;
  }
  return total;
}

TEST(BonPreferenceTest, MatchesEnumeration) {
  Rng rng(181);
  for (int trial = 0; trial < 40; ++trial) {
    const auto space = testing::RandomSpace(rng, 2, 4);
    const auto a = trial % 2 ? SamplingProcess::Chain(testing::RandomPolicy(space, rng),
                                                      testing::RandomConditional(space, rng))
                             : SamplingProcess::Iid(testing::RandomPolicy(space, rng));
    const auto b = SamplingProcess::Iid(testing::RandomPolicy(space, rng));
    std::vector<std::vector<double>> values;
    for (int x = 0; x < space.num_contexts(); ++x) {
      std::vector<double> row;
      // Small integer rewards so ties happen.
      for (int y = 0; y < space.num_actions(x); ++y) row.push_back(rng() % 3);
      values.push_back(row);
    }
    const RewardTable r(values);
    for (int n = 1; n <= 3; ++n) {
      const double ab = BonPreference(space, a, b, r, n);
      EXPECT_NEAR(ab, BruteForceBon(space, a, b, r, n), 1e-12);
      EXPECT_GE(ab + BonPreference(space, b, a, r, n), 1.0 - 1e-12);
    }
  }
}

TEST(BonPreferenceTest, Examples) {
  const RewardTable strict({{3.0, 1.0, 2.0}});
  const auto uniform = SamplingProcess::Iid(Policy::Uniform(kAbc));
  // Self-play with distinct rewards: 0.5 + P[equal maxima] / 2.
  // Maxima 3, 2, 1 with probabilities 5/9, 3/9, 1/9.
  const double tie = 35.0 / 81;
  EXPECT_NEAR(BonPreference(kAbc, uniform, uniform, strict, 2), 0.5 + tie / 2, 1e-15);
  const auto worst = SamplingProcess::Iid(Policy::Deterministic(kAbc, {1}));
  EXPECT_NEAR(BonPreference(kAbc, uniform, worst, strict, 1), 1.0, 1e-15);
  EXPECT_NEAR(BonPreference(kAbc, worst, uniform, strict, 1), 1.0 / 3, 1e-15);
  const double exact = BonPreference(kAbc, worst, uniform, strict, 2);
  EXPECT_NEAR(exact, 1.0 / 9, 1e-15);
  const auto mc = BonPreferenceMonteCarlo(kAbc, worst, uniform, strict, 2, 11, 1'000'000);
  EXPECT_LE(std::abs(mc.value - exact), 3 * mc.std_error);
  EXPECT_THROW(BonPreferenceMonteCarlo(kAbc, worst, uniform, strict, 2, 11, 0),
               ValidationError);
}

TEST(WriteRefinementCsvTest, Format) {
  std::ostringstream out;
  WriteRefinementCsv({{"reference", "top", 2, 0.5, std::nullopt, std::nullopt},
                      {"rlhf", "top", 1, 0.25, 0.3, 0.01}},
                     out);
  EXPECT_EQ(out.str(),
            "policy_id,target,n,analytic,estimate,stderr\n"
            "reference,top,2,0.5,,\n"
            "rlhf,top,1,0.25,0.29999999999999999,0.01\n");
}

}  // namespace
}  // namespace slhf
