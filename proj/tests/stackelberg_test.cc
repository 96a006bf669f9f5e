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

#include "slhf/stackelberg.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"

namespace slhf {
namespace {

using testing::CondorcetGame;

// Largest violation of the two closed-form fixed-point equations, evaluated
// straight from their definitions.
double FixedPointViolation(const PreferenceMatrix& p, const ReferencePair& refs,
                           double tau_l, double tau_f,
                           const StackelbergSolution& s) {
  double worst = 0.0;
  for (int x = 0; x < p.num_contexts(); ++x) {
    const int n = p.num_actions(x);
    std::vector<double> leader(n);
    double leader_z = 0.0;
    for (int y = 0; y < n; ++y) {
      std::vector<double> row(n);
      double z = 0.0;
      for (int r = 0; r < n; ++r) {
        row[r] = refs.follower()(x, y, r) * std::exp(p(x, r, y) / tau_f);
        z += row[r];
      }
      double reward = 0.0, kl = 0.0;
      for (int r = 0; r < n; ++r) {
        row[r] /= z;
        worst = std::max(worst, std::abs(row[r] - s.follower(x, y, r)));
        reward += row[r] * p(x, y, r);
        kl += row[r] * std::log(row[r] / refs.follower()(x, y, r));
      }
      leader[y] = refs.leader()(x, y) * std::exp((reward + tau_f * kl) / tau_l);
      leader_z += leader[y];
    }
    for (int y = 0; y < n; ++y) {
      worst = std::max(worst, std::abs(leader[y] / leader_z - s.leader(x, y)));
    }
  }
  return worst;
}

TEST(StackelbergExactTest, SatisfiesFixedPointEquations) {
  Rng rng(83);
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = testing::RandomSpace(rng, 3, 5);
    const auto p = RandomPreferenceMatrix(space, rng);
    const auto refs = testing::RandomRefs(space, rng);
    const double tl = 0.05 + UniformUnit(rng), tf = 0.05 + UniformUnit(rng);
    const auto s = StackelbergExact(p, refs, {tl, tf});
    EXPECT_TRUE(s.is_exact);
    EXPECT_LE(FixedPointViolation(p, refs, tl, tf, s), 1e-10);
    const Regularization reg{tl, tf};
    const auto g = SlhfGradients(p, s.leader.table(), s.follower.table(), refs, reg);
    EXPECT_LE(StationarityResidual(s.leader.table(), s.follower.table(), g), 1e-6);
    EXPECT_LE(DualityGap(p, s.leader.table(), s.follower.table(), refs, reg), 1e-10);
    EXPECT_NEAR(s.value, SlhfObjective(p, s.leader, s.follower, refs, tl, tf), 1e-15);
  }
}

TEST(StackelbergExactTest, Limits) {
  Rng rng(89);
  const auto space = testing::RandomSpace(rng, 2, 4);
  const auto p = RandomPreferenceMatrix(space, rng);
  const auto refs = testing::RandomRefs(space, rng);
  const auto flat = StackelbergExact(p, refs, {0.1, 1e6});
  for (int x = 0; x < space.num_contexts(); ++x) {
    for (int y = 0; y < space.num_actions(x); ++y) {
      for (int r = 0; r < space.num_actions(x); ++r) {
        EXPECT_NEAR(flat.follower(x, y, r), refs.follower()(x, y, r), 1e-5);
      }
    }
  }

  const auto cycle = testing::CondorcetThird();
  const auto uniform = ReferencePair::Uniform(cycle.space());
  const auto sharp = StackelbergExact(cycle, uniform, {0.01, 0.01});
  EXPECT_GE(sharp.follower(0, 0, 2), 0.999);
  EXPECT_GE(sharp.follower(0, 1, 0), 0.999);
  EXPECT_GE(sharp.follower(0, 2, 1), 0.999);

  const auto dominant = CondorcetGame(0.4, 0.35, 0.25);
  double previous = 0.0;
  for (double tau : {0.1, 0.03, 0.01, 0.003, 0.001}) {
    const auto s = StackelbergExact(dominant, ReferencePair::Uniform(dominant.space()),
                                    {tau, tau});
    EXPECT_GT(s.leader(0, 0), previous);
    previous = s.leader(0, 0);
  }
  EXPECT_GE(previous, 0.99);
}

TEST(StackelbergExactTest, RejectsZeroTau) {
  const auto p = testing::CondorcetThird();
  const auto refs = ReferencePair::Uniform(p.space());
  EXPECT_THROW(StackelbergExact(p, refs, {0.0, 0.1}), ValidationError);
  EXPECT_THROW(StackelbergExact(p, refs, {0.1, 0.0}), ValidationError);
}

TEST(StackelbergEnumerateTest, DominantCycle) {
  const auto p = CondorcetGame(0.4, 0.35, 0.25);
  const auto eq = StackelbergEnumerate(p);
  const std::vector<std::vector<int>> expected = {{2}, {0}, {1}};
  EXPECT_EQ(eq.follower_responses[0], expected);
  EXPECT_EQ(eq.leader_actions[0], std::vector<int>{0});
  EXPECT_NEAR(eq.value, 0.4, 1e-15);
  EXPECT_EQ(eq.Count(), 1.0);
  const auto canonical = eq.Canonical(p.space());
  EXPECT_EQ(canonical.leader(0, 0), 1.0);
  EXPECT_EQ(canonical.follower(0, 1, 0), 1.0);
  EXPECT_NEAR(SlhfObjective(p, canonical.leader, canonical.follower,
                            ReferencePair::Uniform(p.space()), 0, 0),
              0.4, 1e-15);
}

TEST(StackelbergEnumerateTest, IndifferentLeader) {
  const auto eq = StackelbergEnumerate(testing::CondorcetThird());
  EXPECT_EQ(eq.leader_actions[0], (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(eq.value, 1.0 / 3, 1e-15);
  EXPECT_EQ(eq.Count(), 3.0);
}

TEST(StackelbergEnumerateTest, MatchesExhaustiveSearch) {
  Rng rng(97);
  for (int trial = 0; trial < 200; ++trial) {
    const auto space = testing::RandomSpace(rng, 3, 6);
    const auto p = RandomPreferenceMatrix(space, rng);
    const auto eq = StackelbergEnumerate(p);
    double value = 0.0;
    for (int x = 0; x < space.num_contexts(); ++x) {
      const int n = space.num_actions(x);
      // Leader value of committing to y is the worst pure reply.
      double best = -1.0;
      for (int y = 0; y < n; ++y) {
        double worst = 2.0;
        for (int r = 0; r < n; ++r) worst = std::min(worst, p(x, y, r));
        best = std::max(best, worst);
      }
      EXPECT_NEAR(eq.values[x], best, 1e-15);
      for (int y : eq.leader_actions[x]) {
        EXPECT_NEAR(eq.commitment_values[x][y], best, 1e-12);
      }
      value += space.context_prob(x) * best;
    }
    EXPECT_NEAR(eq.value, value, 1e-14);
  }
}

TEST(StackelbergEnumerateTest, CondorcetWinnerLeads) {
  const auto space = ActionSpace::SingleContext({"A", "B", "C", "D"});
  const auto p = BtPreference(RewardTable({{0.0, 1.5, -1.0, 0.5}}), space);
  const auto eq = StackelbergEnumerate(p);
  EXPECT_EQ(eq.leader_actions[0], std::vector<int>{1});
  // The follower can answer B with B, so the best commitment is only a tie.
  EXPECT_NEAR(eq.value, 0.5, 1e-15);
}

TEST(StackelbergEnumerateTest, SmallTauExactAgrees) {
  Rng rng(101);
  int checked = 0;
  for (int trial = 0; trial < 100 && checked < 30; ++trial) {
    const auto space = testing::RandomSpace(rng, 2, 5);
    const auto p = RandomPreferenceMatrix(space, rng);
    const auto eq = StackelbergEnumerate(p);
    // Only games with a clear unique equilibrium.
    bool clear = eq.Count() == 1.0;
    for (int x = 0; clear && x < space.num_contexts(); ++x) {
      auto values = eq.commitment_values[x];
      std::sort(values.rbegin(), values.rend());
      clear = values[0] - values[1] > 0.05;
    }
    if (!clear) continue;
    ++checked;
    const auto exact = StackelbergExact(p, ReferencePair::Uniform(space), {1e-3, 1e-3});
    for (int x = 0; x < space.num_contexts(); ++x) {
      EXPECT_GE(exact.leader(x, eq.leader_actions[x][0]), 0.99);
    }
    EXPECT_NEAR(exact.value, eq.value, 0.01);
  }
  EXPECT_GT(checked, 10);
}

TEST(StackelbergGdaTest, NoOpRunReturnsInitialPolicies) {
  Rng rng(103);
  const auto space = testing::RandomSpace(rng, 2, 4);
  const auto p = RandomPreferenceMatrix(space, rng);
  const auto refs = ReferencePair::Uniform(space);
  GdaConfig config;
  config.leader_step = 0.0;
  config.max_iters = 1;
  config.init_leader = testing::RandomPolicy(space, rng);
  config.init_follower = testing::RandomConditional(space, rng);
  const auto r = StackelbergGda(p, refs, config);
  EXPECT_EQ(r.trace.last_leader, *config.init_leader);
  // Re-projecting a simplex point may move entries by a rounding unit.
  const auto& init = *config.init_follower;
  for (int x = 0; x < space.num_contexts(); ++x) {
    for (int y = 0; y < space.num_actions(x); ++y) {
      for (int z = 0; z < space.num_actions(x); ++z) {
        EXPECT_NEAR(r.trace.last_follower(x, y, z), init(x, y, z), 1e-15);
      }
    }
  }
  EXPECT_EQ(r.solution.leader, *config.init_leader);
  EXPECT_EQ(r.trace.iterations, 1);
  ASSERT_EQ(r.trace.rows.size(), 2u);
  EXPECT_EQ(r.trace.rows[0].objective, r.trace.rows[1].objective);
}

TEST(StackelbergGdaTest, CondorcetConvergesToExact) {
  const auto p = CondorcetGame(0.4, 0.35, 0.25);
  const auto refs = ReferencePair::Uniform(p.space());
  GdaConfig config;
  config.leader_step = 0.01;
  config.kappa = 5;
  config.tau_leader = config.tau_follower = 0.05;
  config.max_iters = 100'000;
  config.record_every = 1000;
  config.stop_tolerance = 0.0;
  const auto r = StackelbergGda(p, refs, config);
  const auto exact = StackelbergExact(p, refs, config.regularization());
  EXPECT_LE(MaxTotalVariation(r.solution.leader, exact.leader), 1e-2);
  EXPECT_LE(JointPlayTotalVariation(p.space(), r.solution.leader.table(),
                                    r.solution.follower.table(),
                                    exact.leader.table(), exact.follower.table()),
            1e-2);
  ASSERT_EQ(r.trace.rows.size(), 101u);
  EXPECT_EQ(r.trace.rows.back().iteration, 100'000);
  EXPECT_LT(r.trace.rows.back().exploitability, r.trace.rows.front().exploitability);
}

TEST(StackelbergGdaTest, RandomGamesReachExactValue) {
  Rng rng(107);
  for (int trial = 0; trial < 5; ++trial) {
    const auto space = ActionSpace::Shared(2, DefaultActionLabels(4));
    const auto p = RandomPreferenceMatrix(space, rng);
    const auto refs = ReferencePair::Uniform(space);
    GdaConfig config;
    config.leader_step = 0.01;
    config.tau_leader = config.tau_follower = 0.1;
    config.max_iters = 100'000;
    config.record_every = 100'000;
    const auto r = StackelbergGda(p, refs, config);
    const auto exact = StackelbergExact(p, refs, config.regularization());
    const double last = SlhfObjective(p, r.trace.last_leader, r.trace.last_follower,
                                      refs, 0.1, 0.1);
    EXPECT_NEAR(last, exact.value, 1e-3);
  }
}

TEST(StackelbergGdaTest, StopsAtTolerance) {
  const auto p = testing::CondorcetThird();
  GdaConfig config;
  config.leader_step = 0.05;
  config.tau_leader = config.tau_follower = 0.2;
  config.max_iters = 1'000'000;
  config.record_every = 10;
  config.stop_tolerance = 1e-9;
  const auto r = StackelbergGda(p, ReferencePair::Uniform(p.space()), config);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LT(r.trace.iterations, config.max_iters);
  EXPECT_LE(r.trace.rows.back().stationarity, 1e-9);
}

TEST(StackelbergGdaTest, ValidationAndDivergence) {
  const auto p = testing::CondorcetThird();
  const auto refs = ReferencePair::Uniform(p.space());
  GdaConfig bad;
  bad.kappa = 0.5;
  EXPECT_THROW(StackelbergGda(p, refs, bad), ValidationError);
  bad = {};
  bad.max_iters = 0;
  EXPECT_THROW(StackelbergGda(p, refs, bad), ValidationError);
  bad = {};
  bad.leader_step = -1;
  EXPECT_THROW(StackelbergGda(p, refs, bad), ValidationError);

  GdaConfig wild;
  wild.leader_step = 1e308;
  wild.kappa = 10;
  wild.max_iters = 10;
  try {
    StackelbergGda(p, refs, wild);
    FAIL() << "expected divergence";
  } catch (const GdaDivergence& e) {
    EXPECT_FALSE(e.trace().rows.empty());
  }
}

TEST(WriteTraceCsvTest, Format) {
  SolveTrace trace;
  trace.rows = {{0, 0.5, 0.25, 0.125}, {10, 0.1, 0.0, 1e-9}};
  std::ostringstream out;
  WriteTraceCsv(trace, out);
  EXPECT_EQ(out.str(),
            "iteration,objective,exploitability,stationarity\n"
            "0,0.5,0.25,0.125\n10,0.10000000000000001,0,1.0000000000000001e-09\n");
}

}  // namespace
}  // namespace slhf
