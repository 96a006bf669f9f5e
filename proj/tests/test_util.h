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

#ifndef SLHF_TESTS_TEST_UTIL_H_
#define SLHF_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "slhf/action_space.h"
#include "slhf/policy.h"
#include "slhf/preference.h"
#include "slhf/rng.h"

namespace slhf::testing {

inline std::vector<double> RandomSimplex(int n, Rng& rng, double floor = 0.0) {
  std::exponential_distribution<double> exp(1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) {
    x = exp(rng) + floor;
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

inline ActionSpace RandomSpace(Rng& rng, int max_contexts, int max_actions,
                               bool same_size = false) {
  const int contexts = 1 + static_cast<int>(rng() % max_contexts);
  const int shared = 2 + static_cast<int>(rng() % (max_actions - 1));
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> actions;
  for (int x = 0; x < contexts; ++x) {
    labels.push_back("c" + std::to_string(x));
    const int n = same_size ? shared : 2 + static_cast<int>(rng() % (max_actions - 1));
    actions.push_back(DefaultActionLabels(n));
  }
  auto rho = RandomSimplex(contexts, rng, 0.1);
  // Make the probabilities sum to one exactly enough for the 1e-12 check.
  rho.back() = 1.0 - std::accumulate(rho.begin(), rho.end() - 1, 0.0);
  return ActionSpace(labels, actions, rho);
}

inline Policy RandomPolicy(const ActionSpace& space, Rng& rng,
                           double floor = 0.0) {
  LeaderTable t;
  for (int x = 0; x < space.num_contexts(); ++x) {
    t.push_back(RandomSimplex(space.num_actions(x), rng, floor));
  }
  return Policy(t);
}

inline ConditionalPolicy RandomConditional(const ActionSpace& space, Rng& rng,
                                           double floor = 0.0) {
  FollowerTable t(space.num_contexts());
  for (int x = 0; x < space.num_contexts(); ++x) {
    for (int y = 0; y < space.num_actions(x); ++y) {
      t[x].push_back(RandomSimplex(space.num_actions(x), rng, floor));
    }
  }
  return ConditionalPolicy(t);
}

inline ReferencePair RandomRefs(const ActionSpace& space, Rng& rng) {
  return ReferencePair(RandomPolicy(space, rng, 0.2),
                       RandomConditional(space, rng, 0.2));
}

// Tournament on n actions: bit k of `bits` (pairs i < j in lexicographic
// order) says i beats j. Winning probabilities are drawn from (0.5, 1].
inline PreferenceMatrix TournamentMatrix(int n, uint64_t bits, Rng& rng) {
  std::uniform_real_distribution<double> strength(0.55, 1.0);
  SquareMatrix m(n, 0.5);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      const double s = strength(rng);
      const bool i_wins = (bits >> k) & 1;
      m(i, j) = i_wins ? s : 1.0 - s;
      m(j, i) = 1.0 - m(i, j);
    }
  }
  return PreferenceMatrix(ActionSpace::SingleContext(DefaultActionLabels(n)),
                          {m});
}

// Counts directed cycles by checking every cyclic ordering of every subset
// of size >= 3 (starting from its least element). beats[i][j] is an edge.
inline std::map<int, int64_t> BruteForceCycles(
    const std::vector<std::vector<bool>>& edge) {
  const int n = static_cast<int>(edge.size());
  std::map<int, int64_t> histogram;
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> members;
    for (int v = 0; v < n; ++v) {
      if (mask & (1u << v)) members.push_back(v);
    }
    if (members.size() < 2) continue;
    std::vector<int> rest(members.begin() + 1, members.end());
    do {
      bool ok = edge[members[0]][rest[0]] && edge[rest.back()][members[0]];
      for (size_t i = 0; ok && i + 1 < rest.size(); ++i) {
        ok = edge[rest[i]][rest[i + 1]];
      }
      if (ok) histogram[static_cast<int>(members.size())]++;
    } while (std::next_permutation(rest.begin(), rest.end()));
  }
  return histogram;
}

inline PreferenceMatrix CondorcetGame(double a1, double a2, double a3) {
  return AggregatePopulation(AnnotatorPopulation::Condorcet(a1, a2, a3),
                             ActionSpace::SingleContext({"A", "B", "C"}));
}

inline PreferenceMatrix CondorcetThird() {
  return CondorcetGame(1.0 / 3, 1.0 / 3, 1.0 / 3);
}

inline std::vector<std::vector<bool>> BeatsRelation(const SquareMatrix& m) {
  std::vector<std::vector<bool>> edge(m.size(), std::vector<bool>(m.size()));
  for (int i = 0; i < m.size(); ++i) {
    for (int j = 0; j < m.size(); ++j) edge[i][j] = m(i, j) > 0.5;
  }
  return edge;
}

}  // namespace slhf::testing

#endif  // SLHF_TESTS_TEST_UTIL_H_
