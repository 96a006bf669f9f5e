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

#include "slhf/lp.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slhf/error.h"

namespace slhf {
namespace {

constexpr double kPivotEpsilon = 1e-12;

}  // namespace

LpResult SolveLp(const std::vector<std::vector<double>>& a,
                 const std::vector<double>& b, const std::vector<double>& c) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(c.size());
  if (static_cast<int>(b.size()) != m) {
    throw ValidationError("SolveLp: b has the wrong length");
  }
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(a[i].size()) != n) {
      throw ValidationError("SolveLp: A has a ragged row");
    }
    if (b[i] < 0.0) throw ValidationError("SolveLp: b must be >= 0");
  }

  // Tableau columns: n structural, m slack, 1 right-hand side. Row m holds
  // the reduced costs (negated objective).
  const int width = n + m + 1;
  std::vector<double> t(static_cast<size_t>(m + 1) * width, 0.0);
  auto at = [&](int r, int col) -> double& { return t[r * width + col]; };
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) at(i, j) = a[i][j];
    at(i, n + i) = 1.0;
    at(i, width - 1) = b[i];
    basis[i] = n + i;
  }
  for (int j = 0; j < n; ++j) at(m, j) = -c[j];

  LpResult result;
  const int max_pivots = 50 * (n + m) + 1000;
  while (true) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (at(m, j) < -kPivotEpsilon) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double coef = at(i, enter);
      if (coef <= kPivotEpsilon) continue;
      const double ratio = at(i, width - 1) / coef;
      if (ratio < best_ratio - kPivotEpsilon ||
          (std::abs(ratio - best_ratio) <= kPivotEpsilon &&
           basis[i] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = i;
      }
    }
    if (leave < 0) throw SolveError("lp", "objective is unbounded");
    if (++result.pivots > max_pivots) {
      throw SolveError("lp", "pivot limit reached");
    }
    const double pivot = at(leave, enter);
    for (int j = 0; j < width; ++j) at(leave, j) /= pivot;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double factor = at(i, enter);
      if (factor == 0.0) continue;
      for (int j = 0; j < width; ++j) at(i, j) -= factor * at(leave, j);
    }
    basis[leave] = enter;
  }

  result.primal.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) result.primal[basis[i]] = at(i, width - 1);
  }
  result.dual.resize(m);
  for (int i = 0; i < m; ++i) result.dual[i] = at(m, n + i);
  result.value = at(m, width - 1);
  return result;
}

MatrixGameSolution SolveMatrixGame(
    const std::vector<std::vector<double>>& payoff) {
  const int rows = static_cast<int>(payoff.size());
  if (rows == 0 || payoff[0].empty()) {
    throw ValidationError("SolveMatrixGame: empty payoff matrix");
  }
  const int cols = static_cast<int>(payoff[0].size());
  double lowest = payoff[0][0];
  for (const auto& row : payoff) {
    if (static_cast<int>(row.size()) != cols) {
      throw ValidationError("SolveMatrixGame: ragged payoff matrix");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw ValidationError("SolveMatrixGame: non-finite payoff");
      }
      lowest = std::min(lowest, v);
    }
  }
  // Shift so every entry is >= 1; the value becomes 1 / sum(w) for the
  // column player's LP  max 1.w  s.t.  M w <= 1.
  const double shift = 1.0 - lowest;
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m[i][j] = payoff[i][j] + shift;
  }
  const LpResult lp = SolveLp(m, std::vector<double>(rows, 1.0),
                              std::vector<double>(cols, 1.0));
  MatrixGameSolution solution;
  auto normalise = [](std::vector<double> v) {
    double total = 0.0;
    for (double& x : v) {
      x = std::max(x, 0.0);
      total += x;
    }
    for (double& x : v) x /= total;
    return v;
  };
  solution.column_strategy = normalise(lp.primal);
  solution.row_strategy = normalise(lp.dual);
  solution.value = 1.0 / lp.value - shift;
  return solution;
}

}  // namespace slhf
