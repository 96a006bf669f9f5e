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

#include "slhf/nash.h"

#include <algorithm>
#include <cmath>

#include "slhf/error.h"
#include "slhf/lp.h"

namespace slhf {
namespace {

std::vector<double> ExpectedRow(const SquareMatrix& m,
                                std::span<const double> pi) {
  const int n = m.size();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out[i] += m(i, j) * pi[j];
  }
  return out;
}

double ContextResidual(const SquareMatrix& m, std::span<const double> pi,
                       std::span<const double> ref, double tau) {
  const auto target = SoftmaxPolicy(ExpectedRow(m, pi), ref, tau);
  double worst = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    worst = std::max(worst, std::abs(pi[i] - target[i]));
  }
  return worst;
}

// Extragradient in the entropic geometry for the regularised symmetric game.
// The update keeps the iterate strictly positive and has the regularised NE
// as its unique fixed point.
std::vector<double> RegularizedEquilibrium(const SquareMatrix& m,
                                           std::span<const double> ref,
                                           double tau,
                                           const NashOptions& options,
                                           int& iterations, double& residual) {
  const int n = m.size();
  double spread = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(m(i, j) - 0.5);
    spread = std::max(spread, row);
  }
  const double step = spread > 0.0 ? 0.5 / spread : 1.0;
  std::vector<double> log_ref(n), log_pi(n), log_half(n), half(n);
  std::vector<double> pi(ref.begin(), ref.end());
  for (int i = 0; i < n; ++i) {
    log_ref[i] = std::log(ref[i]);
    log_pi[i] = log_ref[i];
  }
  auto normalise = [n](std::vector<double>& logs, std::vector<double>& probs) {
    const double shift = *std::max_element(logs.begin(), logs.end());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      probs[i] = std::exp(logs[i] - shift);
      total += probs[i];
    }
    const double log_total = std::log(total) + shift;
    for (int i = 0; i < n; ++i) {
      probs[i] /= total;
      logs[i] -= log_total;
    }
  };
  const double denom = 1.0 + step * tau;
  residual = ContextResidual(m, pi, ref, tau);
  iterations = 0;
  while (residual > options.tolerance && iterations < options.max_iters) {
    const auto g = ExpectedRow(m, pi);
    for (int i = 0; i < n; ++i) {
      log_half[i] = (log_pi[i] + step * (g[i] + tau * log_ref[i])) / denom;
    }
    normalise(log_half, half);
    const auto g_half = ExpectedRow(m, half);
    for (int i = 0; i < n; ++i) {
      log_pi[i] = (log_pi[i] + step * (g_half[i] + tau * log_ref[i])) / denom;
    }
    normalise(log_pi, pi);
    ++iterations;
    if (iterations % 16 == 0 || iterations == options.max_iters) {
      residual = ContextResidual(m, pi, ref, tau);
    }
  }
  residual = ContextResidual(m, pi, ref, tau);
  return pi;
}

}  // namespace

std::vector<double> Exploitability(const PreferenceMatrix& p, const Policy& pi) {
  pi.CheckShape(p.space());
  std::vector<double> out(p.num_contexts());
  for (int x = 0; x < p.num_contexts(); ++x) {
    const auto row = ExpectedRow(p.context(x), pi[x]);
    out[x] = std::max(0.0, *std::max_element(row.begin(), row.end()) - 0.5);
  }
  return out;
}

double NashFixedPointResidual(const PreferenceMatrix& p, const Policy& pi,
                              const Policy& ref, double tau) {
  pi.CheckShape(p.space());
  ref.CheckShape(p.space());
  double worst = 0.0;
  for (int x = 0; x < p.num_contexts(); ++x) {
    worst = std::max(worst, ContextResidual(p.context(x), pi[x], ref[x], tau));
  }
  return worst;
}

NashSolution NashSolve(const PreferenceMatrix& p, const Policy& ref,
                       const NashOptions& options) {
  if (!(options.tau >= 0.0) || !std::isfinite(options.tau)) {
    throw ValidationError("NashSolve: tau must be finite and >= 0");
  }
  const bool lp = options.method == NashMethod::kLpExact;
  if (lp != (options.tau == 0.0)) {
    throw ValidationError(
        "NashSolve: the LP method needs tau = 0 and the fixed-point method "
        "needs tau > 0");
  }
  NashSolution solution;
  LeaderTable table(p.num_contexts());
  if (lp) {
    for (int x = 0; x < p.num_contexts(); ++x) {
      const SquareMatrix& m = p.context(x);
      std::vector<std::vector<double>> payoff(m.size(),
                                              std::vector<double>(m.size()));
      for (int i = 0; i < m.size(); ++i) {
        for (int j = 0; j < m.size(); ++j) payoff[i][j] = m(i, j);
      }
      table[x] = SolveMatrixGame(payoff).row_strategy;
    }
  } else {
    ref.CheckShape(p.space());
    if (!ref.IsStrictlyPositive()) {
      throw ValidationError("NashSolve: reference must be strictly positive");
    }
    for (int x = 0; x < p.num_contexts(); ++x) {
      int iterations = 0;
      double residual = 0.0;
      table[x] = RegularizedEquilibrium(p.context(x), ref[x], options.tau,
                                        options, iterations, residual);
      solution.iterations = std::max(solution.iterations, iterations);
      solution.residual = std::max(solution.residual, residual);
    }
    if (solution.residual > options.tolerance) {
      throw SolveError("nash",
                       "regularised fixed point did not converge within " +
                           std::to_string(options.max_iters) + " iterations",
                       solution.residual);
    }
  }
  solution.policy = Policy(std::move(table));
  solution.exploitability = Exploitability(p, solution.policy);
  if (lp) {
    solution.residual = *std::max_element(solution.exploitability.begin(),
                                          solution.exploitability.end());
  }
  return solution;
}

}  // namespace slhf
