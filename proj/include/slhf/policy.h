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

#ifndef SLHF_POLICY_H_
#define SLHF_POLICY_H_

#include <span>
#include <vector>

#include "slhf/action_space.h"

namespace slhf {

// [context][action]
using LeaderTable = std::vector<std::vector<double>>;
// [context][leader action][follower action]
using FollowerTable = std::vector<std::vector<std::vector<double>>>;

inline constexpr double kSimplexTolerance = 1e-10;
// Floor applied to iterates before any log is taken.
inline constexpr double kProbabilityFloor = 1e-12;

// A Leader policy x -> Delta(Y_x). Every row lies in the simplex within
// kSimplexTolerance.
class Policy {
 public:
  Policy() = default;
  explicit Policy(LeaderTable probs);

  static Policy Uniform(const ActionSpace& space);
  // Point mass on actions[x] in every context.
  static Policy Deterministic(const ActionSpace& space,
                              const std::vector<int>& actions);

  int num_contexts() const { return static_cast<int>(probs_.size()); }
  int num_actions(int x) const {
    return static_cast<int>(probs_[x].size());
  }
  std::span<const double> operator[](int x) const { return probs_[x]; }
  double operator()(int x, int y) const { return probs_[x][y]; }
  const LeaderTable& table() const { return probs_; }

  // Throws ValidationError when the shape disagrees with `space`.
  void CheckShape(const ActionSpace& space) const;
  bool IsStrictlyPositive() const;

  bool operator==(const Policy&) const = default;

 private:
  LeaderTable probs_;
};

// A Follower policy (x, y) -> Delta(Y_x).
class ConditionalPolicy {
 public:
  ConditionalPolicy() = default;
  explicit ConditionalPolicy(FollowerTable probs);

  static ConditionalPolicy Uniform(const ActionSpace& space);
  // Point mass on responses[x][y] after leader action y.
  static ConditionalPolicy Deterministic(
      const ActionSpace& space, const std::vector<std::vector<int>>& responses);
  // omega(. | x, y) = pi(. | x) for every y.
  static ConditionalPolicy Independent(const Policy& policy);

  int num_contexts() const { return static_cast<int>(probs_.size()); }
  int num_actions(int x) const {
    return static_cast<int>(probs_[x].size());
  }
  std::span<const double> operator()(int x, int y) const {
    return probs_[x][y];
  }
  double operator()(int x, int y, int response) const {
    return probs_[x][y][response];
  }
  const FollowerTable& table() const { return probs_; }

  void CheckShape(const ActionSpace& space) const;
  bool IsStrictlyPositive() const;

  bool operator==(const ConditionalPolicy&) const = default;

 private:
  FollowerTable probs_;
};

// Reference policies for both players; every entry is strictly positive.
class ReferencePair {
 public:
  ReferencePair() = default;
  ReferencePair(Policy leader, ConditionalPolicy follower);

  static ReferencePair Uniform(const ActionSpace& space);

  const Policy& leader() const { return leader_; }
  const ConditionalPolicy& follower() const { return follower_; }

  void CheckShape(const ActionSpace& space) const;

 private:
  Policy leader_;
  ConditionalPolicy follower_;
};

// Euclidean projection onto the probability simplex (sort/threshold method).
// Throws ValidationError on empty or non-finite input.
std::vector<double> ProjectSimplex(std::span<const double> v);
// Allocation-free variant for solver loops; `scratch` is resized as needed.
// No input checks.
void ProjectSimplexInPlace(std::span<double> v, std::vector<double>& scratch);

// sum_i p_i log(p_i / q_i) in nats with 0 log 0 = 0. Returns +infinity when
// p_i > 0 and q_i = 0. Throws ValidationError for size mismatch, negative or
// non-finite entries.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// ref_i exp(scores_i / tau), normalised. Throws ValidationError unless
// tau > 0 and ref is strictly positive.
std::vector<double> SoftmaxPolicy(std::span<const double> scores,
                                  std::span<const double> ref, double tau);

// Half the l1 distance.
double TotalVariation(std::span<const double> p, std::span<const double> q);
// Largest per-context total variation.
double MaxTotalVariation(const Policy& a, const Policy& b);

// Clamps entries below kProbabilityFloor and renormalises.
std::vector<double> FloorAndRenormalize(std::span<const double> p);

// Index of the largest entry; ties go to the lowest index.
int ArgMax(std::span<const double> v);

}  // namespace slhf

#endif  // SLHF_POLICY_H_
