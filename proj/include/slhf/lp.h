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

#ifndef SLHF_LP_H_
#define SLHF_LP_H_

#include <vector>

namespace slhf {

struct LpResult {
  std::vector<double> primal;
  std::vector<double> dual;  // one per constraint row
  double value = 0.0;
  int pivots = 0;
};

// Dense primal simplex with Bland's rule for
//   maximize c.x  subject to  A x <= b,  x >= 0,
// with b >= 0 so the origin is feasible. Throws SolveError when unbounded or
// when the pivot cap is hit.
LpResult SolveLp(const std::vector<std::vector<double>>& a,
                 const std::vector<double>& b, const std::vector<double>& c);

struct MatrixGameSolution {
  std::vector<double> row_strategy;
  std::vector<double> column_strategy;
  double value = 0.0;  // row player's expected payoff
};

// Zero-sum game where the row player receives payoff[i][j]. Entries may have
// any sign.
MatrixGameSolution SolveMatrixGame(
    const std::vector<std::vector<double>>& payoff);

}  // namespace slhf

#endif  // SLHF_LP_H_
