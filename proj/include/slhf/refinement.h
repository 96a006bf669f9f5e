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

#ifndef SLHF_REFINEMENT_H_
#define SLHF_REFINEMENT_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "slhf/action_space.h"
#include "slhf/policy.h"
#include "slhf/preference.h"
#include "slhf/rng.h"

namespace slhf {

// How y_1..y_N are drawn: y_1 ~ leader, then y_i ~ follower(. | x, y_{i-1}).
// Independent sampling uses follower(. | x, y) = leader(. | x).
class SamplingProcess {
 public:
  SamplingProcess() = default;
  static SamplingProcess Iid(Policy policy);
  static SamplingProcess Chain(Policy leader, ConditionalPolicy follower);

  bool is_chain() const { return chain_; }
  const Policy& leader() const { return leader_; }
  int num_contexts() const { return leader_.num_contexts(); }
  int num_actions(int x) const { return leader_.num_actions(x); }
  std::span<const double> Next(int x, int previous) const {
    return chain_ ? follower_(x, previous) : leader_[x];
  }

  void CheckShape(const ActionSpace& space) const;

 private:
  bool chain_ = false;
  Policy leader_;
  ConditionalPolicy follower_;
};

struct RefinementChain {
  int context = 0;
  std::vector<int> actions;  // y_1..y_N
  uint64_t seed = 0;
};

RefinementChain SampleChain(const SamplingProcess& process, int context, int n,
                            uint64_t seed);

class TargetSpec {
 public:
  TargetSpec() = default;
  // Throws ValidationError on an empty set.
  static TargetSpec FromSets(std::vector<std::vector<int>> sets);
  // Every action attaining the maximum reward in its context.
  static TargetSpec TopActions(const RewardTable& rewards);

  bool Contains(int x, int y) const;
  const std::vector<std::vector<int>>& sets() const { return sets_; }
  void CheckShape(const ActionSpace& space) const;

 private:
  std::vector<std::vector<int>> sets_;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // normal approximation
  int trials = 0;
};

// P[some y_i in the target], per context, by absorbing-state propagation.
std::vector<double> HitProbabilityPerContext(const SamplingProcess& process,
                                             const TargetSpec& target, int n);
// rho-weighted.
double HitProbability(const ActionSpace& space, const SamplingProcess& process,
                      const TargetSpec& target, int n);
Estimate HitProbabilityMonteCarlo(const ActionSpace& space,
                                  const SamplingProcess& process,
                                  const TargetSpec& target, int n,
                                  uint64_t seed, int trials);

double BestOfNValue(const RewardTable& rewards, int context,
                    std::span<const int> samples);

// P[max reward of side a >= max reward of side b] with N draws per side;
// ties count for side a.
double BonPreference(const ActionSpace& space, const SamplingProcess& a,
                     const SamplingProcess& b, const RewardTable& rewards,
                     int n);
Estimate BonPreferenceMonteCarlo(const ActionSpace& space,
                                 const SamplingProcess& a,
                                 const SamplingProcess& b,
                                 const RewardTable& rewards, int n,
                                 uint64_t seed, int trials);

struct RefinementRow {
  std::string policy_id;
  std::string target;
  int n = 0;
  double analytic = 0.0;
  // Monte Carlo columns; empty when no trials were requested.
  std::optional<double> estimate;
  std::optional<double> std_error;

  bool operator==(const RefinementRow&) const = default;
};

void WriteRefinementCsv(const std::vector<RefinementRow>& rows,
                        std::ostream& out);

}  // namespace slhf

#endif  // SLHF_REFINEMENT_H_
