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

#include "slhf/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gtest/gtest.h"
#include "slhf/error.h"
#include "test_util.h"

namespace slhf {
namespace {

double Distance(const std::vector<double>& a, std::span<const double> b) {
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(total);
}

// Projection by bisection on the threshold theta in sum max(v - theta, 0) = 1.
std::vector<double> BisectionProjection(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double total = 0.0;
    for (double x : v) total += std::max(x - mid, 0.0);
    (total > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> out;
  for (double x : v) out.push_back(std::max(x - 0.5 * (lo + hi), 0.0));
  return out;
}

TEST(PolicyTest, ValidatesRows) {
  EXPECT_THROW(Policy({{0.5, 0.6}}), ValidationError);
  EXPECT_THROW(Policy({{1.1, -0.1}}), ValidationError);
  EXPECT_NO_THROW(Policy({{0.5, 0.5 + 1e-11}}));
  EXPECT_THROW(ConditionalPolicy({{{1.0, 0.0}, {0.2, 0.2}}}), ValidationError);
  const auto space = ActionSpace::SingleContext({"A", "B"});
  EXPECT_THROW(Policy({{0.2, 0.3, 0.5}}).CheckShape(space), ValidationError);
}

TEST(PolicyTest, ReferencesMustBePositive) {
  const auto space = ActionSpace::SingleContext({"A", "B"});
  EXPECT_THROW(ReferencePair(Policy({{1.0, 0.0}}), ConditionalPolicy::Uniform(space)),
               ValidationError);
  EXPECT_THROW(ReferencePair(Policy::Uniform(space),
                             ConditionalPolicy::Deterministic(space, {{0, 1}})),
               ValidationError);
  EXPECT_NO_THROW(ReferencePair::Uniform(space));
}

TEST(ProjectSimplexTest, Examples) {
  const auto same = ProjectSimplex(std::vector<double>{0.2, 0.3, 0.5});
  EXPECT_NEAR(same[0], 0.2, 1e-15);
  EXPECT_NEAR(same[1], 0.3, 1e-15);
  EXPECT_NEAR(same[2], 0.5, 1e-15);
  EXPECT_EQ(ProjectSimplex(std::vector<double>{2, 0, 0}),
            (std::vector<double>{1, 0, 0}));
  const auto mid = ProjectSimplex(std::vector<double>{1.0, 0.5, 0.0});
  EXPECT_NEAR(mid[0], 0.75, 1e-15);
  EXPECT_NEAR(mid[1], 0.25, 1e-15);
  EXPECT_EQ(mid[2], 0.0);
  EXPECT_EQ(ProjectSimplex(std::vector<double>{-3.0}), std::vector<double>{1.0});
  EXPECT_THROW(ProjectSimplex(std::vector<double>{}), ValidationError);
  EXPECT_THROW(ProjectSimplex(std::vector<double>{1.0, NAN}), ValidationError);
  EXPECT_THROW(
      ProjectSimplex(std::vector<double>{std::numeric_limits<double>::infinity()}),
      ValidationError);
}

TEST(ProjectSimplexTest, OptimalIdempotentAndMatchesBisection) {
  Rng rng(17);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 8;
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    const auto w = ProjectSimplex(v);
    double total = 0.0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    const auto again = ProjectSimplex(w);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(again[i], w[i], 1e-12);
    const auto oracle = BisectionProjection(v);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(w[i], oracle[i], 1e-10);
    for (int k = 0; k < 10; ++k) {
      const auto u = testing::RandomSimplex(n, rng);
      EXPECT_LE(Distance(w, v), Distance(u, v) + 1e-10);
    }
    std::vector<double> in_place = v, scratch;
    ProjectSimplexInPlace(in_place, scratch);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(in_place[i], w[i], 1e-15);
  }
}

TEST(KlDivergenceTest, Examples) {
  const std::vector<double> p = {0.2, 0.5, 0.3};
  EXPECT_EQ(KlDivergence(p, p), 0.0);
  const std::vector<double> u = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(KlDivergence(u, std::vector<double>{0.5, 0.25, 0.25}),
              std::log(32.0 / 27.0) / 3.0, 1e-15);
  EXPECT_NEAR(std::log(32.0 / 27.0) / 3.0, 0.056633, 1e-6);
  EXPECT_NEAR(KlDivergence(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}),
              std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isinf(
      KlDivergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0})));
  EXPECT_THROW(KlDivergence(std::vector<double>{0.5, NAN},
                            std::vector<double>{0.5, 0.5}),
               ValidationError);
}

TEST(KlDivergenceTest, GibbsInequality) {
  Rng rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 6;
    const auto p = testing::RandomSimplex(n, rng);
    const auto q = testing::RandomSimplex(n, rng, 0.01);
    EXPECT_GT(KlDivergence(p, q), 0.0);
    EXPECT_NEAR(KlDivergence(p, p), 0.0, 1e-15);
  }
}

TEST(SoftmaxPolicyTest, Examples) {
  const std::vector<double> ref = {0.2, 0.3, 0.5};
  const auto same = SoftmaxPolicy(std::vector<double>{4, 4, 4}, ref, 0.3);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(same[i], ref[i], 1e-15);
  const auto flat = SoftmaxPolicy(std::vector<double>{0.0, 0.7, 1.0}, ref, 1e6);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(flat[i], ref[i], 1e-5);
  const std::vector<double> uniform = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto e = SoftmaxPolicy(std::vector<double>{1, 0, 0}, uniform, 1.0);
  const double z = std::exp(1.0) + 2.0;
  EXPECT_NEAR(e[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(e[1], 1.0 / z, 1e-15);
  EXPECT_NEAR(e[0], 0.57612, 1e-5);
  EXPECT_NEAR(e[2], 0.21194, 1e-5);
  EXPECT_THROW(SoftmaxPolicy(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}, 0.0),
               ValidationError);
  EXPECT_THROW(SoftmaxPolicy(std::vector<double>{1, 0}, std::vector<double>{1.0, 0.0}, 1.0),
               ValidationError);
  // Large scores must not overflow.
  const auto big = SoftmaxPolicy(std::vector<double>{1000, 0}, std::vector<double>{0.5, 0.5}, 1e-3);
  EXPECT_EQ(big[0], 1.0);
}

TEST(SoftmaxPolicyTest, MaximisesRegularisedScore) {
  Rng rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<double> scores(n);
    for (double& s : scores) s = unit(rng);
    const auto ref = testing::RandomSimplex(n, rng, 0.05);
    const double tau = 0.05 + unit(rng);
    const auto u = SoftmaxPolicy(scores, ref, tau);
    auto g = [&](std::span<const double> v) {
      double value = 0.0;
      for (int i = 0; i < n; ++i) value += scores[i] * v[i];
      return value - tau * KlDivergence(v, ref);
    };
    const double best = g(u);
    for (int k = 0; k < 1000; ++k) {
      EXPECT_GE(best, g(testing::RandomSimplex(n, rng)) - 1e-12);
    }
    // KKT: s_i - tau log(u_i / ref_i) is constant across i.
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < n; ++i) {
      const double c = scores[i] - tau * std::log(u[i] / ref[i]);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    EXPECT_LE(hi - lo, 1e-8);
  }
}

TEST(SoftmaxPolicyTest, PreservesOrderUnderUniformReference) {
  Rng rng(29);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 6;
    std::vector<double> scores(n), ref(n, 1.0 / n);
    for (double& s : scores) s = normal(rng);
    const auto u = SoftmaxPolicy(scores, ref, 0.7);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (scores[i] > scores[j]) EXPECT_GT(u[i], u[j]);
      }
    }
  }
}

TEST(PolicyHelpersTest, TotalVariationArgMaxFloor) {
  EXPECT_NEAR(TotalVariation(std::vector<double>{1, 0}, std::vector<double>{0.25, 0.75}),
              0.75, 1e-15);
  EXPECT_EQ(ArgMax(std::vector<double>{0.2, 0.4, 0.4}), 1);
  const auto floored = FloorAndRenormalize(std::vector<double>{1.0, 0.0});
  EXPECT_GT(floored[1], 0.0);
  EXPECT_NEAR(floored[0] + floored[1], 1.0, 1e-15);
  const auto space = ActionSpace::Shared(2, {"A", "B"});
  EXPECT_NEAR(MaxTotalVariation(Policy::Deterministic(space, {0, 1}),
                                Policy::Uniform(space)),
              0.5, 1e-15);
}

}  // namespace
}  // namespace slhf
