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

#ifndef SLHF_NASH_H_
#define SLHF_NASH_H_

#include <vector>

#include "slhf/policy.h"
#include "slhf/preference.h"

namespace slhf {

enum class NashMethod {
  kLpExact,               // tau = 0
  kRegularizedFixedPoint,  // tau > 0
};

struct NashOptions {
  double tau = 0.0;
  NashMethod method = NashMethod::kLpExact;
  int max_iters = 1'000'000;
  // Sup-norm residual of pi - softmax(P pi / tau, ref) at which the
  // regularised iteration stops.
  double tolerance = 1e-12;
};

struct NashSolution {
  Policy policy;
  std::vector<double> exploitability;  // per context, unregularised
  // LP path: largest exploitability. Fixed-point path: final residual.
  double residual = 0.0;
  int iterations = 0;
};

// `ref` is only read when tau > 0. Throws ValidationError on a
// method/tau mismatch and SolveError (with the residual) when the fixed point
// does not converge.
NashSolution NashSolve(const PreferenceMatrix& p, const Policy& ref,
                       const NashOptions& options);

// max_{y'} sum_y pi(y|x) P(y' > y | x) - 0.5, clamped at 0, per context.
std::vector<double> Exploitability(const PreferenceMatrix& p, const Policy& pi);

// Sup-norm of pi - softmax(P pi / tau, ref) over all contexts.
double NashFixedPointResidual(const PreferenceMatrix& p, const Policy& pi,
                              const Policy& ref, double tau);

}  // namespace slhf

#endif  // SLHF_NASH_H_
