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
#include <numeric>
#include <string>

#include "slhf/error.h"

namespace slhf {
namespace {

void CheckSimplex(std::span<const double> p, const std::string& where) {
  if (p.empty()) throw ValidationError(where + ": empty distribution");
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(where + ": entry " + std::to_string(v) +
                            " is not a probability");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw ValidationError(where + ": sums to " + std::to_string(total));
  }
}

bool AllPositive(std::span<const double> p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return v > 0.0; });
}

}  // namespace

Policy::Policy(LeaderTable probs) : probs_(std::move(probs)) {
  for (size_t x = 0; x < probs_.size(); ++x) {
    CheckSimplex(probs_[x], "Policy context " + std::to_string(x));
  }
}

Policy Policy::Uniform(const ActionSpace& space) {
  LeaderTable table;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int n = space.num_actions(x);
    table.emplace_back(n, 1.0 / n);
  }
  return Policy(std::move(table));
}

Policy Policy::Deterministic(const ActionSpace& space,
                             const std::vector<int>& actions) {
  if (static_cast<int>(actions.size()) != space.num_contexts()) {
    throw ValidationError("Policy::Deterministic: one action per context");
  }
  LeaderTable table;
  for (int x = 0; x < space.num_contexts(); ++x) {
    if (actions[x] < 0 || actions[x] >= space.num_actions(x)) {
      throw ValidationError("Policy::Deterministic: action out of range");
    }
    std::vector<double> row(space.num_actions(x), 0.0);
    row[actions[x]] = 1.0;
    table.push_back(std::move(row));
  }
  return Policy(std::move(table));
}

void Policy::CheckShape(const ActionSpace& space) const {
  if (num_contexts() != space.num_contexts()) {
    throw ValidationError("Policy has " + std::to_string(num_contexts()) +
                          " contexts, space has " +
                          std::to_string(space.num_contexts()));
  }
  for (int x = 0; x < num_contexts(); ++x) {
    if (num_actions(x) != space.num_actions(x)) {
      throw ValidationError("Policy context " + std::to_string(x) +
                            " has the wrong number of actions");
    }
  }
}

bool Policy::IsStrictlyPositive() const {
  return std::all_of(probs_.begin(), probs_.end(),
                     [](const auto& row) { return AllPositive(row); });
}

ConditionalPolicy::ConditionalPolicy(FollowerTable probs)
    : probs_(std::move(probs)) {
  for (size_t x = 0; x < probs_.size(); ++x) {
    for (size_t y = 0; y < probs_[x].size(); ++y) {
      if (probs_[x][y].size() != probs_[x].size()) {
        throw ValidationError("ConditionalPolicy context " + std::to_string(x) +
                              ": rows must cover the action set");
      }
      CheckSimplex(probs_[x][y], "ConditionalPolicy (" + std::to_string(x) +
                                     ", " + std::to_string(y) + ")");
    }
  }
}

ConditionalPolicy ConditionalPolicy::Uniform(const ActionSpace& space) {
  FollowerTable table;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int n = space.num_actions(x);
    table.emplace_back(n, std::vector<double>(n, 1.0 / n));
  }
  return ConditionalPolicy(std::move(table));
}

ConditionalPolicy ConditionalPolicy::Deterministic(
    const ActionSpace& space, const std::vector<std::vector<int>>& responses) {
  if (static_cast<int>(responses.size()) != space.num_contexts()) {
    throw ValidationError("ConditionalPolicy::Deterministic: bad shape");
  }
  FollowerTable table;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const int n = space.num_actions(x);
    if (static_cast<int>(responses[x].size()) != n) {
      throw ValidationError("ConditionalPolicy::Deterministic: bad shape");
    }
    auto& rows = table.emplace_back();
    for (int y = 0; y < n; ++y) {
      if (responses[x][y] < 0 || responses[x][y] >= n) {
        throw ValidationError("ConditionalPolicy::Deterministic: bad action");
      }
      std::vector<double> row(n, 0.0);
      row[responses[x][y]] = 1.0;
      rows.push_back(std::move(row));
    }
  }
  return ConditionalPolicy(std::move(table));
}

ConditionalPolicy ConditionalPolicy::Independent(const Policy& policy) {
  FollowerTable table;
  for (int x = 0; x < policy.num_contexts(); ++x) {
    const auto& row = policy.table()[x];
    table.emplace_back(row.size(), row);
  }
  return ConditionalPolicy(std::move(table));
}

void ConditionalPolicy::CheckShape(const ActionSpace& space) const {
  if (num_contexts() != space.num_contexts()) {
    throw ValidationError("ConditionalPolicy has the wrong number of contexts");
  }
  for (int x = 0; x < num_contexts(); ++x) {
    if (num_actions(x) != space.num_actions(x)) {
      throw ValidationError("ConditionalPolicy context " + std::to_string(x) +
                            " has the wrong number of actions");
    }
  }
}

bool ConditionalPolicy::IsStrictlyPositive() const {
  for (const auto& rows : probs_) {
    for (const auto& row : rows) {
      if (!AllPositive(row)) return false;
    }
  }
  return true;
}

ReferencePair::ReferencePair(Policy leader, ConditionalPolicy follower)
    : leader_(std::move(leader)), follower_(std::move(follower)) {
  if (leader_.num_contexts() != follower_.num_contexts()) {
    throw ValidationError("ReferencePair: leader/follower context mismatch");
  }
  for (int x = 0; x < leader_.num_contexts(); ++x) {
    if (leader_.num_actions(x) != follower_.num_actions(x)) {
      throw ValidationError("ReferencePair: leader/follower action mismatch");
    }
  }
  if (!leader_.IsStrictlyPositive() || !follower_.IsStrictlyPositive()) {
    throw ValidationError("ReferencePair: references must be strictly positive");
  }
}

ReferencePair ReferencePair::Uniform(const ActionSpace& space) {
  return ReferencePair(Policy::Uniform(space), ConditionalPolicy::Uniform(space));
}

void ReferencePair::CheckShape(const ActionSpace& space) const {
  leader_.CheckShape(space);
  follower_.CheckShape(space);
}

std::vector<double> ProjectSimplex(std::span<const double> v) {
  if (v.empty()) throw ValidationError("ProjectSimplex: empty vector");
  for (double value : v) {
    if (!std::isfinite(value)) {
      throw ValidationError("ProjectSimplex: non-finite entry");
    }
  }
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with sorted[k-1] - (sum_{i<k} sorted[i] - 1) / k > 0.
  double cumulative = 0.0;
  double threshold = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) threshold = candidate;
  }
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i] - threshold, 0.0);
  }
  return out;
}

void ProjectSimplexInPlace(std::span<double> v, std::vector<double>& scratch) {
  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (size_t k = 0; k < scratch.size(); ++k) {
    cumulative += scratch[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (scratch[k] - candidate > 0.0) threshold = candidate;
  }
  for (double& value : v) value = std::max(value - threshold, 0.0);
}

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("KlDivergence: size mismatch");
  }
  double total = 0.0;
  bool infinite = false;
  for (size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || !std::isfinite(q[i]) || p[i] < 0.0 ||
        q[i] < 0.0) {
      throw ValidationError("KlDivergence: entries must be finite and >= 0");
    }
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      infinite = true;
      continue;
    }
    total += p[i] * std::log(p[i] / q[i]);
  }
  if (infinite) return std::numeric_limits<double>::infinity();
  return std::max(total, 0.0);
}

std::vector<double> SoftmaxPolicy(std::span<const double> scores,
                                  std::span<const double> ref, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("SoftmaxPolicy: tau must be positive");
  }
  if (scores.size() != ref.size() || scores.empty()) {
    throw ValidationError("SoftmaxPolicy: size mismatch");
  }
  std::vector<double> logits(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!(ref[i] > 0.0) || !std::isfinite(scores[i])) {
      throw ValidationError(
          "SoftmaxPolicy: reference must be strictly positive and scores finite");
    }
    logits[i] = scores[i] / tau + std::log(ref[i]);
  }
  const double shift = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - shift);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("TotalVariation: size mismatch");
  }
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

double MaxTotalVariation(const Policy& a, const Policy& b) {
  if (a.num_contexts() != b.num_contexts()) {
    throw ValidationError("MaxTotalVariation: context mismatch");
  }
  double worst = 0.0;
  for (int x = 0; x < a.num_contexts(); ++x) {
    worst = std::max(worst, TotalVariation(a[x], b[x]));
  }
  return worst;
}

std::vector<double> FloorAndRenormalize(std::span<const double> p) {
  std::vector<double> out(p.begin(), p.end());
  double total = 0.0;
  for (double& v : out) {
    v = std::max(v, kProbabilityFloor);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

int ArgMax(std::span<const double> v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace slhf
