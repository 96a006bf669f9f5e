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

#ifndef SLHF_BRADLEY_TERRY_H_
#define SLHF_BRADLEY_TERRY_H_

#include <string>
#include <vector>

#include "slhf/action_space.h"
#include "slhf/policy.h"
#include "slhf/preference.h"

namespace slhf {

struct BtFitOptions {
  // Weight of the centering penalty lambda * (r_w + r_l)^2.
  double lambda = 0.0;
  // Stop when the sup-norm of the gradient falls below this.
  double tolerance = 1e-9;
  int max_iters = 100'000;
};

struct BtFit {
  RewardTable rewards;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
  std::vector<std::string> warnings;
};

// Minimises  sum -log sigmoid(r_w - r_l) + lambda (r_w + r_l)^2  by gradient
// descent with backtracking. With lambda = 0 the rewards of observed actions
// are centered to sum zero per context. Actions that never appear in a
// context stay at 0 and produce a warning.
BtFit FitBtMle(const ComparisonDataset& data, const ActionSpace& space,
               const BtFitOptions& options = {});

struct RlhfSolution {
  Policy policy;
  // tau <= 0: the policy is the lowest-index argmax of the rewards.
  bool argmax_limit = false;
};

RlhfSolution RlhfPolicy(const RewardTable& rewards, const Policy& ref,
                        double tau);

}  // namespace slhf

#endif  // SLHF_BRADLEY_TERRY_H_
