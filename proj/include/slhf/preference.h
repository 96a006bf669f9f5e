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

#ifndef SLHF_PREFERENCE_H_
#define SLHF_PREFERENCE_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slhf/action_space.h"
#include "slhf/policy.h"

namespace slhf {

inline constexpr double kConstructionTolerance = 1e-12;

// Dense row-major n x n matrix.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, double fill = 0.0)
      : n_(n), data_(static_cast<size_t>(n) * n, fill) {}

  int size() const { return n_; }
  double& operator()(int i, int j) { return data_[i * n_ + j]; }
  double operator()(int i, int j) const { return data_[i * n_ + j]; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

// Per-context pairwise win probabilities P_x[i][j] = p(y_i > y_j | x).
// Invariants (checked on construction): entries in [0, 1], diagonal exactly
// 0.5, P + P^T = 1 within kConstructionTolerance.
class PreferenceMatrix {
 public:
  PreferenceMatrix() = default;
  PreferenceMatrix(ActionSpace space, std::vector<SquareMatrix> matrices);

  const ActionSpace& space() const { return space_; }
  int num_contexts() const { return space_.num_contexts(); }
  int num_actions(int x) const { return space_.num_actions(x); }
  const SquareMatrix& context(int x) const { return matrices_[x]; }
  double operator()(int x, int i, int j) const { return matrices_[x](i, j); }

  bool operator==(const PreferenceMatrix&) const = default;

 private:
  ActionSpace space_;
  std::vector<SquareMatrix> matrices_;
};

// Weighted strict rankings. rankings[k] lists action labels from most to
// least preferred.
class AnnotatorPopulation {
 public:
  AnnotatorPopulation() = default;
  AnnotatorPopulation(std::vector<std::vector<std::string>> rankings,
                      std::vector<double> weights);

  // The three-type Condorcet population A>B>C, B>C>A, C>A>B.
  static AnnotatorPopulation Condorcet(double a1, double a2, double a3);

  const std::vector<std::vector<std::string>>& rankings() const {
    return rankings_;
  }
  const std::vector<double>& weights() const { return weights_; }
  int num_types() const { return static_cast<int>(rankings_.size()); }

  bool operator==(const AnnotatorPopulation&) const = default;

 private:
  std::vector<std::vector<std::string>> rankings_;
  std::vector<double> weights_;
};

// Finite real-valued scores r(x, y).
class RewardTable {
 public:
  RewardTable() = default;
  explicit RewardTable(std::vector<std::vector<double>> values);

  int num_contexts() const { return static_cast<int>(values_.size()); }
  std::span<const double> operator[](int x) const { return values_[x]; }
  double operator()(int x, int y) const { return values_[x][y]; }
  const std::vector<std::vector<double>>& values() const { return values_; }

  void CheckShape(const ActionSpace& space) const;

  bool operator==(const RewardTable&) const = default;

 private:
  std::vector<std::vector<double>> values_;
};

struct Comparison {
  std::string context;
  std::string chosen;
  std::string rejected;

  bool operator==(const Comparison&) const = default;
};

// Records (x, y_w, y_l) with y_w != y_l.
class ComparisonDataset {
 public:
  ComparisonDataset() = default;
  explicit ComparisonDataset(std::vector<Comparison> records);

  const std::vector<Comparison>& records() const { return records_; }
  size_t size() const { return records_.size(); }

  // Throws ValidationError if a label is missing from `space`.
  void CheckLabels(const ActionSpace& space) const;

  bool operator==(const ComparisonDataset&) const = default;

 private:
  std::vector<Comparison> records_;
};

// P[i][j] = sum_k alpha_k 1{y_i ranked above y_j by type k}. Every context's
// action list must be a permutation of each ranking.
PreferenceMatrix AggregatePopulation(const AnnotatorPopulation& population,
                                     const ActionSpace& space);

// Bradley-Terry: P[i][j] = sigmoid(r_i - r_j).
PreferenceMatrix BtPreference(const RewardTable& rewards,
                              const ActionSpace& space);

double Sigmoid(double z);

struct PolicyPreferenceResult {
  std::vector<double> per_context;
  double average = 0.0;  // rho-weighted
};

// p(pi > pi' | x) = E_{y~pi, y'~pi'}[P_x[y][y']].
PolicyPreferenceResult PolicyPreference(const PreferenceMatrix& p,
                                        const Policy& pi,
                                        const Policy& pi_prime);

// Per context, the action beating every other one with probability > 1/2.
std::vector<std::optional<int>> CondorcetWinner(const PreferenceMatrix& p);

// Uniform random complementary matrices over `space`; off-diagonal entries
// are drawn from U(0, 1).
PreferenceMatrix RandomPreferenceMatrix(const ActionSpace& space,
                                        std::mt19937_64& rng);

}  // namespace slhf

#endif  // SLHF_PREFERENCE_H_
