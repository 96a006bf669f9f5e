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
#include <limits>

#include "slhf/error.h"

namespace slhf {
namespace {

void CheckCount(int n) {
  if (n < 1) throw ValidationError("number of samples N must be >= 1");
}

void CheckTrials(int trials) {
  if (trials < 1) throw ValidationError("Monte Carlo trials must be >= 1");
}

Estimate FromBernoulli(int64_t successes, int trials) {
  Estimate e;
  e.trials = trials;
  e.value = static_cast<double>(successes) / trials;
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / trials);
  return e;
}

// Index of every action's reward among the sorted distinct reward levels.
std::vector<int> RewardLevels(std::span<const double> rewards,
                              std::vector<double>& levels) {
  levels.assign(rewards.begin(), rewards.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<int> index(rewards.size());
  for (size_t y = 0; y < rewards.size(); ++y) {
    index[y] = static_cast<int>(
        std::lower_bound(levels.begin(), levels.end(), rewards[y]) -
        levels.begin());
  }
  return index;
}

// Distribution of the running-max level after n draws.
std::vector<double> MaxLevelDistribution(const SamplingProcess& process,
                                         int x, const std::vector<int>& level,
                                         int num_levels, int n) {
  const int k = process.num_actions(x);
  // state[y * num_levels + l]: last action y, running max level l.
  std::vector<double> state(static_cast<size_t>(k) * num_levels, 0.0);
  std::vector<double> next(state.size());
  const auto first = process.leader()[x];
  for (int y = 0; y < k; ++y) state[y * num_levels + level[y]] += first[y];
  for (int step = 1; step < n; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int y = 0; y < k; ++y) {
      const auto row = process.Next(x, y);
      for (int l = 0; l < num_levels; ++l) {
        const double mass = state[y * num_levels + l];
        if (mass == 0.0) continue;
        for (int r = 0; r < k; ++r) {
          next[r * num_levels + std::max(l, level[r])] += mass * row[r];
        }
      }
    }
    std::swap(state, next);
  }
  std::vector<double> out(num_levels, 0.0);
  for (int y = 0; y < k; ++y) {
    for (int l = 0; l < num_levels; ++l) out[l] += state[y * num_levels + l];
  }
  return out;
}

std::vector<int> DrawSequence(const SamplingProcess& process, int x, int n,
                              Rng& rng) {
  std::vector<int> out;
  out.reserve(n);
  out.push_back(SampleCategorical(process.leader()[x], rng));
  for (int i = 1; i < n; ++i) {
    out.push_back(SampleCategorical(process.Next(x, out.back()), rng));
  }
  return out;
}

}  // namespace

SamplingProcess SamplingProcess::Iid(Policy policy) {
  SamplingProcess p;
  p.leader_ = std::move(policy);
  return p;
}

SamplingProcess SamplingProcess::Chain(Policy leader,
                                       ConditionalPolicy follower) {
  if (leader.num_contexts() != follower.num_contexts()) {
    throw ValidationError("SamplingProcess: leader/follower shapes differ");
  }
  for (int x = 0; x < leader.num_contexts(); ++x) {
    if (leader.num_actions(x) != follower.num_actions(x)) {
      throw ValidationError("SamplingProcess: leader/follower shapes differ");
    }
  }
  SamplingProcess p;
  p.chain_ = true;
  p.leader_ = std::move(leader);
  p.follower_ = std::move(follower);
  return p;
}

void SamplingProcess::CheckShape(const ActionSpace& space) const {
  leader_.CheckShape(space);
  if (chain_) follower_.CheckShape(space);
}

RefinementChain SampleChain(const SamplingProcess& process, int context, int n,
                            uint64_t seed) {
  CheckCount(n);
  if (context < 0 || context >= process.num_contexts()) {
    throw ValidationError("SampleChain: context index out of range");
  }
  Rng rng(seed);
  RefinementChain chain;
  chain.context = context;
  chain.seed = seed;
  chain.actions = DrawSequence(process, context, n, rng);
  return chain;
}

TargetSpec TargetSpec::FromSets(std::vector<std::vector<int>> sets) {
  for (auto& s : sets) {
    if (s.empty()) throw ValidationError("TargetSpec: empty target set");
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  TargetSpec t;
  t.sets_ = std::move(sets);
  return t;
}

TargetSpec TargetSpec::TopActions(const RewardTable& rewards) {
  std::vector<std::vector<int>> sets(rewards.num_contexts());
  for (int x = 0; x < rewards.num_contexts(); ++x) {
    const auto row = rewards[x];
    if (row.empty()) throw ValidationError("TargetSpec: empty reward row");
    const double best = *std::max_element(row.begin(), row.end());
    for (size_t y = 0; y < row.size(); ++y) {
      if (row[y] == best) sets[x].push_back(static_cast<int>(y));
    }
  }
  return FromSets(std::move(sets));
}

bool TargetSpec::Contains(int x, int y) const {
  return std::binary_search(sets_[x].begin(), sets_[x].end(), y);
}

void TargetSpec::CheckShape(const ActionSpace& space) const {
  if (static_cast<int>(sets_.size()) != space.num_contexts()) {
    throw ValidationError("TargetSpec: expected one target set per context");
  }
  for (int x = 0; x < space.num_contexts(); ++x) {
    for (int y : sets_[x]) {
      if (y < 0 || y >= space.num_actions(x)) {
        throw ValidationError("TargetSpec: target action out of range");
      }
    }
  }
}

std::vector<double> HitProbabilityPerContext(const SamplingProcess& process,
                                             const TargetSpec& target, int n) {
  CheckCount(n);
  if (static_cast<int>(target.sets().size()) != process.num_contexts()) {
    throw ValidationError("HitProbability: expected one target set per context");
  }
  std::vector<double> out(process.num_contexts());
  for (int x = 0; x < process.num_contexts(); ++x) {
    const int k = process.num_actions(x);
    // Mass still outside the target after each draw.
    std::vector<double> alive(k, 0.0), next(k);
    const auto first = process.leader()[x];
    for (int y = 0; y < k; ++y) {
      if (!target.Contains(x, y)) alive[y] = first[y];
    }
    for (int step = 1; step < n; ++step) {
      std::fill(next.begin(), next.end(), 0.0);
      for (int y = 0; y < k; ++y) {
        if (alive[y] == 0.0) continue;
        const auto row = process.Next(x, y);
        for (int r = 0; r < k; ++r) {
          if (!target.Contains(x, r)) next[r] += alive[y] * row[r];
        }
      }
      std::swap(alive, next);
    }
    double missed = 0.0;
    for (double v : alive) missed += v;
    out[x] = std::clamp(1.0 - missed, 0.0, 1.0);
  }
  return out;
}

double HitProbability(const ActionSpace& space, const SamplingProcess& process,
                      const TargetSpec& target, int n) {
  process.CheckShape(space);
  target.CheckShape(space);
  const auto per_context = HitProbabilityPerContext(process, target, n);
  double total = 0.0;
  for (int x = 0; x < space.num_contexts(); ++x) {
    total += space.context_prob(x) * per_context[x];
  }
  return total;
}

Estimate HitProbabilityMonteCarlo(const ActionSpace& space,
                                  const SamplingProcess& process,
                                  const TargetSpec& target, int n,
                                  uint64_t seed, int trials) {
  CheckCount(n);
  CheckTrials(trials);
  process.CheckShape(space);
  target.CheckShape(space);
  Rng rng(seed);
  int64_t hits = 0;
  for (int t = 0; t < trials; ++t) {
    const int x = SampleCategorical(space.context_dist(), rng);
    int y = SampleCategorical(process.leader()[x], rng);
    bool hit = target.Contains(x, y);
    for (int i = 1; i < n && !hit; ++i) {
      y = SampleCategorical(process.Next(x, y), rng);
      hit = target.Contains(x, y);
    }
    hits += hit ? 1 : 0;
  }
  return FromBernoulli(hits, trials);
}

double BestOfNValue(const RewardTable& rewards, int context,
                    std::span<const int> samples) {
  if (samples.empty()) throw ValidationError("BestOfNValue: no samples");
  if (context < 0 || context >= rewards.num_contexts()) {
    throw ValidationError("BestOfNValue: context index out of range");
  }
  const auto row = rewards[context];
  double best = -std::numeric_limits<double>::infinity();
  for (int y : samples) {
    if (y < 0 || y >= static_cast<int>(row.size())) {
      throw ValidationError("BestOfNValue: sample index out of range");
    }
    best = std::max(best, row[y]);
  }
  return best;
}

double BonPreference(const ActionSpace& space, const SamplingProcess& a,
                     const SamplingProcess& b, const RewardTable& rewards,
                     int n) {
  CheckCount(n);
  a.CheckShape(space);
  b.CheckShape(space);
  rewards.CheckShape(space);
  double total = 0.0;
  std::vector<double> levels;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const auto level = RewardLevels(rewards[x], levels);
    const int num_levels = static_cast<int>(levels.size());
    const auto da = MaxLevelDistribution(a, x, level, num_levels, n);
    const auto db = MaxLevelDistribution(b, x, level, num_levels, n);
    double win = 0.0, below = 0.0;
    for (int l = 0; l < num_levels; ++l) {
      below += db[l];  // P[max_b <= level l]
      win += da[l] * below;
    }
    total += space.context_prob(x) * win;
  }
  return std::clamp(total, 0.0, 1.0);
}

Estimate BonPreferenceMonteCarlo(const ActionSpace& space,
                                 const SamplingProcess& a,
                                 const SamplingProcess& b,
                                 const RewardTable& rewards, int n,
                                 uint64_t seed, int trials) {
  CheckCount(n);
  CheckTrials(trials);
  a.CheckShape(space);
  b.CheckShape(space);
  rewards.CheckShape(space);
  Rng rng(seed);
  int64_t wins = 0;
  for (int t = 0; t < trials; ++t) {
    const int x = SampleCategorical(space.context_dist(), rng);
    const auto sa = DrawSequence(a, x, n, rng);
    const auto sb = DrawSequence(b, x, n, rng);
    if (BestOfNValue(rewards, x, sa) >= BestOfNValue(rewards, x, sb)) ++wins;
  }
  return FromBernoulli(wins, trials);
}

void WriteRefinementCsv(const std::vector<RefinementRow>& rows,
                        std::ostream& out) {
  out << "policy_id,target,n,analytic,estimate,stderr\n";
  const auto old_precision = out.precision(17);
  for (const RefinementRow& row : rows) {
    out << row.policy_id << ',' << row.target << ',' << row.n << ','
        << row.analytic << ',';
    if (row.estimate) out << *row.estimate;
    out << ',';
    if (row.std_error) out << *row.std_error;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace slhf
