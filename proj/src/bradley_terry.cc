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

#include "slhf/bradley_terry.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "slhf/error.h"

namespace slhf {
namespace {

struct PairCount {
  int x, winner, loser;
  double count;
};

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Objective(const std::vector<PairCount>& pairs, const LeaderTable& r,
                 double lambda) {
  double total = 0.0;
  for (const PairCount& c : pairs) {
    const double rw = r[c.x][c.winner], rl = r[c.x][c.loser];
    total += c.count * Softplus(-(rw - rl));
    if (lambda > 0.0) total += c.count * lambda * (rw + rl) * (rw + rl);
  }
  return total;
}

double Gradient(const std::vector<PairCount>& pairs, const LeaderTable& r,
                double lambda, LeaderTable& g) {
  for (auto& row : g) std::fill(row.begin(), row.end(), 0.0);
  for (const PairCount& c : pairs) {
    const double rw = r[c.x][c.winner], rl = r[c.x][c.loser];
    const double s = Sigmoid(-(rw - rl));
    const double center = 2.0 * lambda * (rw + rl);
    g[c.x][c.winner] += c.count * (-s + center);
    g[c.x][c.loser] += c.count * (s + center);
  }
  double norm = 0.0;
  for (const auto& row : g) {
    for (double v : row) norm = std::max(norm, std::abs(v));
  }
  return norm;
}

// Hessian of Objective over the flattened reward vector.
void Hessian(const std::vector<PairCount>& pairs, const LeaderTable& r,
             double lambda, const std::vector<int>& offset,
             std::vector<std::vector<double>>& h) {
  for (auto& row : h) std::fill(row.begin(), row.end(), 0.0);
  for (const PairCount& c : pairs) {
    const int w = offset[c.x] + c.winner, l = offset[c.x] + c.loser;
    const double s = Sigmoid(r[c.x][c.winner] - r[c.x][c.loser]);
    const double a = c.count * s * (1.0 - s);
    const double b = c.count * 2.0 * lambda;
    h[w][w] += a + b;
    h[l][l] += a + b;
    h[w][l] += b - a;
    h[l][w] += b - a;
  }
}

// Solves (h + ridge I) d = rhs by Cholesky; h is positive semidefinite.
std::vector<double> SolveRidge(std::vector<std::vector<double>> h,
                               std::vector<double> rhs) {
  const int n = static_cast<int>(rhs.size());
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, h[i][i]);
  const double ridge = 1e-10 * std::max(scale, 1e-300);
  for (int i = 0; i < n; ++i) h[i][i] += ridge;
  for (int j = 0; j < n; ++j) {
    double d = h[j][j];
    for (int k = 0; k < j; ++k) d -= h[j][k] * h[j][k];
    h[j][j] = std::sqrt(std::max(d, ridge));
    for (int i = j + 1; i < n; ++i) {
      double v = h[i][j];
      for (int k = 0; k < j; ++k) v -= h[i][k] * h[j][k];
      h[i][j] = v / h[j][j];
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) rhs[i] -= h[i][k] * rhs[k];
    rhs[i] /= h[i][i];
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) rhs[i] -= h[k][i] * rhs[k];
    rhs[i] /= h[i][i];
  }
  return rhs;
}

}  // namespace

BtFit FitBtMle(const ComparisonDataset& data, const ActionSpace& space,
               const BtFitOptions& options) {
  if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda)) {
    throw ValidationError("FitBtMle: lambda must be finite and >= 0");
  }
  if (options.max_iters < 1 || !(options.tolerance > 0.0)) {
    throw ValidationError("FitBtMle: need max_iters >= 1 and tolerance > 0");
  }
  data.CheckLabels(space);

  std::map<std::tuple<int, int, int>, double> counts;
  std::vector<std::vector<bool>> observed(space.num_contexts());
  for (int x = 0; x < space.num_contexts(); ++x) {
    observed[x].assign(space.num_actions(x), false);
  }
  for (const Comparison& c : data.records()) {
    const int x = space.ContextIndex(c.context);
    const int w = space.ActionIndex(x, c.chosen);
    const int l = space.ActionIndex(x, c.rejected);
    counts[{x, w, l}] += 1.0;
    observed[x][w] = observed[x][l] = true;
  }
  std::vector<PairCount> pairs;
  for (const auto& [key, n] : counts) {
    pairs.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  }

  BtFit fit;
  for (int x = 0; x < space.num_contexts(); ++x) {
    for (int y = 0; y < space.num_actions(x); ++y) {
      if (!observed[x][y]) {
        fit.warnings.push_back("action '" + space.actions(x)[y] +
                               "' never compared in context '" +
                               space.context(x) + "'; reward pinned to 0");
      }
    }
  }

  LeaderTable r(space.num_contexts()), g(space.num_contexts()),
      trial(space.num_contexts()), trial_g(space.num_contexts());
  std::vector<int> offset;
  int dims = 0;
  for (int x = 0; x < space.num_contexts(); ++x) {
    r[x].assign(space.num_actions(x), 0.0);
    g[x] = trial[x] = trial_g[x] = r[x];
    offset.push_back(dims);
    dims += space.num_actions(x);
  }
  std::vector<std::vector<double>> hessian(dims, std::vector<double>(dims));
  std::vector<double> rhs(dims);
  double value = Objective(pairs, r, options.lambda);
  double norm = Gradient(pairs, r, options.lambda, g);
  int it = 0;
  // Damped Newton with a backtracking line search. Near the optimum the
  // decrease drops below the objective's rounding, and a step is then
  // accepted if it shrinks the gradient instead.
  while (norm > options.tolerance && it < options.max_iters) {
    Hessian(pairs, r, options.lambda, offset, hessian);
    for (size_t x = 0; x < r.size(); ++x) {
      for (size_t y = 0; y < r[x].size(); ++y) rhs[offset[x] + y] = -g[x][y];
    }
    const std::vector<double> direction = SolveRidge(hessian, rhs);
    double slope = 0.0;
    for (int i = 0; i < dims; ++i) slope += direction[i] * rhs[i];
    const double noise = 1e-14 * std::max(1.0, std::abs(value));
    double next = value, next_norm = norm;
    bool accepted = false;
    for (double step = 1.0; step >= 1e-12; step *= 0.5) {
      for (size_t x = 0; x < r.size(); ++x) {
        for (size_t y = 0; y < r[x].size(); ++y) {
          trial[x][y] = r[x][y] + step * direction[offset[x] + y];
        }
      }
      next = Objective(pairs, trial, options.lambda);
      if (next < value && next <= value - 1e-4 * step * slope) {
        next_norm = Gradient(pairs, trial, options.lambda, trial_g);
        accepted = true;
        break;
      }
      if (std::abs(next - value) <= noise) {
        next_norm = Gradient(pairs, trial, options.lambda, trial_g);
        if (next_norm < norm) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;  // no further progress
    std::swap(r, trial);
    std::swap(g, trial_g);
    value = next;
    norm = next_norm;
    ++it;
  }

  fit.iterations = it;
  fit.gradient_norm = norm;
  fit.converged = norm <= options.tolerance;
  if (options.lambda == 0.0) {
    for (int x = 0; x < space.num_contexts(); ++x) {
      double mean = 0.0;
      int seen = 0;
      for (int y = 0; y < space.num_actions(x); ++y) {
        if (observed[x][y]) {
          mean += r[x][y];
          ++seen;
        }
      }
      if (seen == 0) continue;
      mean /= seen;
      for (int y = 0; y < space.num_actions(x); ++y) {
        if (observed[x][y]) r[x][y] -= mean;
      }
    }
  }
  fit.objective = Objective(pairs, r, options.lambda);
  double largest = 0.0;
  for (const auto& row : r) {
    for (double v : row) largest = std::max(largest, std::abs(v));
  }
  if (largest > 15.0) {
    fit.warnings.push_back(
        "fitted rewards are large; the comparisons may be separable and the "
        "maximum-likelihood estimate may not exist");
  }
  if (!fit.converged) {
    fit.warnings.push_back("gradient norm " + std::to_string(norm) +
                           " above tolerance after " + std::to_string(it) +
                           " iterations");
  }
  fit.rewards = RewardTable(std::move(r));
  return fit;
}

RlhfSolution RlhfPolicy(const RewardTable& rewards, const Policy& ref,
                        double tau) {
  if (!std::isfinite(tau)) throw ValidationError("RlhfPolicy: tau must be finite");
  if (rewards.num_contexts() != ref.num_contexts()) {
    throw ValidationError("RlhfPolicy: reward and reference shapes differ");
  }
  RlhfSolution solution;
  LeaderTable table(ref.num_contexts());
  for (int x = 0; x < ref.num_contexts(); ++x) {
    if (static_cast<int>(rewards[x].size()) != ref.num_actions(x)) {
      throw ValidationError("RlhfPolicy: reward and reference shapes differ");
    }
    if (tau > 0.0) {
      table[x] = SoftmaxPolicy(rewards[x], ref[x], tau);
    } else {
      table[x].assign(ref.num_actions(x), 0.0);
      table[x][ArgMax(rewards[x])] = 1.0;
    }
  }
  solution.policy = Policy(std::move(table));
  solution.argmax_limit = !(tau > 0.0);
  return solution;
}

}  // namespace slhf
