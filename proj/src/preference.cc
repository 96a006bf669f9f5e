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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "slhf/error.h"

namespace slhf {

PreferenceMatrix::PreferenceMatrix(ActionSpace space,
                                   std::vector<SquareMatrix> matrices)
    : space_(std::move(space)), matrices_(std::move(matrices)) {
  if (static_cast<int>(matrices_.size()) != space_.num_contexts()) {
    throw ValidationError("PreferenceMatrix: one matrix per context required");
  }
  for (int x = 0; x < space_.num_contexts(); ++x) {
    const SquareMatrix& m = matrices_[x];
    const std::string where = "PreferenceMatrix context '" + space_.context(x) + "'";
    if (m.size() != space_.num_actions(x)) {
      throw ValidationError(where + ": matrix size does not match actions");
    }
    for (int i = 0; i < m.size(); ++i) {
      if (m(i, i) != 0.5) {
        throw ValidationError(where + ": diagonal entry is not 0.5");
      }
      for (int j = 0; j < m.size(); ++j) {
        const double v = m(i, j);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          throw ValidationError(where + ": entry (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") is not a probability");
        }
        if (std::abs(v + m(j, i) - 1.0) > kConstructionTolerance) {
          throw ValidationError(where + ": P + P^T != 1 at (" +
                                std::to_string(i) + ", " + std::to_string(j) +
                                ")");
        }
      }
    }
  }
}

AnnotatorPopulation::AnnotatorPopulation(
    std::vector<std::vector<std::string>> rankings, std::vector<double> weights)
    : rankings_(std::move(rankings)), weights_(std::move(weights)) {
  if (rankings_.empty()) {
    throw ValidationError("AnnotatorPopulation: no annotator types");
  }
  if (rankings_.size() != weights_.size()) {
    throw ValidationError("AnnotatorPopulation: one weight per ranking");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ValidationError("AnnotatorPopulation: weights must be >= 0");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("AnnotatorPopulation: weights sum to " +
                          std::to_string(total));
  }
  const std::set<std::string> first(rankings_[0].begin(), rankings_[0].end());
  for (size_t k = 0; k < rankings_.size(); ++k) {
    const std::set<std::string> labels(rankings_[k].begin(), rankings_[k].end());
    if (labels.size() != rankings_[k].size()) {
      throw ValidationError("AnnotatorPopulation: ranking " + std::to_string(k) +
                            " repeats an action");
    }
    if (labels != first) {
      throw ValidationError("AnnotatorPopulation: ranking " + std::to_string(k) +
                            " is not a permutation of ranking 0");
    }
  }
}

AnnotatorPopulation AnnotatorPopulation::Condorcet(double a1, double a2,
                                                   double a3) {
  return AnnotatorPopulation(
      {{"A", "B", "C"}, {"B", "C", "A"}, {"C", "A", "B"}}, {a1, a2, a3});
}

RewardTable::RewardTable(std::vector<std::vector<double>> values)
    : values_(std::move(values)) {
  for (const auto& row : values_) {
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw ValidationError("RewardTable: non-finite reward");
      }
    }
  }
}

void RewardTable::CheckShape(const ActionSpace& space) const {
  if (num_contexts() != space.num_contexts()) {
    throw ValidationError("RewardTable: context count mismatch");
  }
  for (int x = 0; x < num_contexts(); ++x) {
    if (static_cast<int>(values_[x].size()) != space.num_actions(x)) {
      throw ValidationError("RewardTable: action count mismatch in context " +
                            std::to_string(x));
    }
  }
}

ComparisonDataset::ComparisonDataset(std::vector<Comparison> records)
    : records_(std::move(records)) {
  for (size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].chosen == records_[i].rejected) {
      throw ValidationError("ComparisonDataset: record " + std::to_string(i) +
                            " compares an action with itself");
    }
  }
}

void ComparisonDataset::CheckLabels(const ActionSpace& space) const {
  for (const Comparison& c : records_) {
    const int x = space.ContextIndex(c.context);
    space.ActionIndex(x, c.chosen);
    space.ActionIndex(x, c.rejected);
  }
}

PreferenceMatrix AggregatePopulation(const AnnotatorPopulation& population,
                                     const ActionSpace& space) {
  std::vector<SquareMatrix> matrices;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int n = space.num_actions(x);
    SquareMatrix m(n, 0.0);
    for (int k = 0; k < population.num_types(); ++k) {
      const auto& ranking = population.rankings()[k];
      if (static_cast<int>(ranking.size()) != n) {
        throw ValidationError("AggregatePopulation: ranking " +
                              std::to_string(k) + " does not cover context '" +
                              space.context(x) + "'");
      }
      // position[y] = rank of action y under type k (0 = best).
      std::vector<int> position(n, -1);
      for (int r = 0; r < n; ++r) {
        const int y = space.ActionIndex(x, ranking[r]);
        if (position[y] != -1) {
          throw ValidationError("AggregatePopulation: ranking " +
                                std::to_string(k) + " is not a permutation");
        }
        position[y] = r;
      }
      const double w = population.weights()[k];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (position[i] < position[j]) m(i, j) += w;
        }
      }
    }
    // Pairs are filled from the upper triangle so P + P^T = 1 holds to the
    // last bit.
    for (int i = 0; i < n; ++i) {
      m(i, i) = 0.5;
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = std::clamp(m(i, j), 0.0, 1.0);
        m(j, i) = 1.0 - m(i, j);
      }
    }
    matrices.push_back(std::move(m));
  }
  return PreferenceMatrix(space, std::move(matrices));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

PreferenceMatrix BtPreference(const RewardTable& rewards,
                              const ActionSpace& space) {
  rewards.CheckShape(space);
  std::vector<SquareMatrix> matrices;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int n = space.num_actions(x);
    SquareMatrix m(n, 0.5);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = Sigmoid(rewards(x, i) - rewards(x, j));
        m(j, i) = 1.0 - m(i, j);
      }
    }
    matrices.push_back(std::move(m));
  }
  return PreferenceMatrix(space, std::move(matrices));
}

PolicyPreferenceResult PolicyPreference(const PreferenceMatrix& p,
                                        const Policy& pi,
                                        const Policy& pi_prime) {
  pi.CheckShape(p.space());
  pi_prime.CheckShape(p.space());
  PolicyPreferenceResult result;
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    double value = 0.0;
    for (int i = 0; i < m.size(); ++i) {
      if (pi(x, i) == 0.0) continue;
      double row = 0.0;
      for (int j = 0; j < m.size(); ++j) row += m(i, j) * pi_prime(x, j);
      value += pi(x, i) * row;
    }
    result.per_context.push_back(value);
    result.average += p.space().context_prob(x) * value;
  }
  return result;
}

std::vector<std::optional<int>> CondorcetWinner(const PreferenceMatrix& p) {
  std::vector<std::optional<int>> winners;
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    std::optional<int> winner;
    for (int i = 0; i < m.size() && !winner; ++i) {
      bool beats_all = true;
      for (int j = 0; j < m.size(); ++j) {
        if (j != i && !(m(i, j) > 0.5)) {
          beats_all = false;
          break;
        }
      }
      if (beats_all) winner = i;
    }
    winners.push_back(winner);
  }
  return winners;
}

PreferenceMatrix RandomPreferenceMatrix(const ActionSpace& space,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SquareMatrix> matrices;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int n = space.num_actions(x);
    SquareMatrix m(n, 0.5);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = unit(rng);
        m(j, i) = 1.0 - m(i, j);
      }
    }
    matrices.push_back(std::move(m));
  }
  return PreferenceMatrix(space, std::move(matrices));
}

}  // namespace slhf
