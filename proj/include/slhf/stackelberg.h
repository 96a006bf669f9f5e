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

#ifndef SLHF_STACKELBERG_H_
#define SLHF_STACKELBERG_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "slhf/error.h"
#include "slhf/objective.h"
#include "slhf/policy.h"
#include "slhf/preference.h"
#include "slhf/rng.h"

namespace slhf {

struct StackelbergSolution {
  Policy leader;
  ConditionalPolicy follower;
  double value = 0.0;  // f(leader, follower)
  bool is_exact = false;
};

// Closed-form follower response to every leader action:
//   omega*(y' | x, y) ∝ omega_ref(y' | x, y) exp(P(y' > y | x) / tau_F).
ConditionalPolicy ExactFollowerResponse(const PreferenceMatrix& p,
                                        const ReferencePair& refs,
                                        double tau_follower);

// Leader payoff of each action against `follower`:
//   E_{y'~omega}[P(y > y')] (+ tau_F KL(omega(.|x,y) || omega_ref) when the
//   coupling includes the follower KL).
LeaderTable LeaderScores(const PreferenceMatrix& p,
                         const ConditionalPolicy& follower,
                         const ReferencePair& refs, const Regularization& reg);

// The unique regularised Stackelberg equilibrium. Requires tau_L, tau_F > 0
// and strictly positive references (ValidationError otherwise).
StackelbergSolution StackelbergExact(const PreferenceMatrix& p,
                                     const ReferencePair& refs,
                                     const Regularization& reg);

// Deterministic equilibria of the unregularised game.
struct DeterministicEquilibria {
  // [x][y] -> follower best responses argmin_{y'} P(y > y' | x).
  std::vector<std::vector<std::vector<int>>> follower_responses;
  // [x][y] -> min_{y'} P(y > y' | x), the value of committing to y.
  LeaderTable commitment_values;
  // [x] -> leader actions maximising the commitment value.
  std::vector<std::vector<int>> leader_actions;
  std::vector<double> values;  // per context
  double value = 0.0;          // rho-weighted

  // Lowest-index representative of every tie set.
  StackelbergSolution Canonical(const ActionSpace& space) const;
  // Number of distinct deterministic equilibria (product of tie-set sizes
  // over contexts, leader choices and follower responses).
  double Count() const;
};

// Ties within kConstructionTolerance are kept in the tie sets.
DeterministicEquilibria StackelbergEnumerate(const PreferenceMatrix& p);

struct GdaConfig {
  double leader_step = 1e-3;  // eta_L
  double kappa = 5.0;         // eta_F = kappa * eta_L
  double tau_leader = 1e-3;
  double tau_follower = 1e-3;
  int max_iters = 100'000;
  // Trailing iterates in the uniform average; 0 means the last half.
  int average_window = 0;
  // Stop when the projected-gradient residual drops below this. Checked at
  // recorded iterations.
  double stop_tolerance = 1e-8;
  int record_every = 1;
  std::optional<Policy> init_leader;              // default: reference
  std::optional<ConditionalPolicy> init_follower;  // default: reference
  LeaderCoupling coupling = LeaderCoupling::kIncludeFollowerKl;

  double follower_step() const { return kappa * leader_step; }
  Regularization regularization() const {
    return {tau_leader, tau_follower, coupling};
  }
  // Throws ValidationError.
  void Validate() const;
};

enum class Baseline { kNone, kBatchMean };

// How the KL penalties enter the sampled signals.
enum class KlEstimator {
  // k = pi / pi_ref and k = omega / omega_ref; both players use (p - tau k).
  kLikelihoodRatio,
  // log-ratio signals whose expectation is the exact gradient of f.
  kExactGradient,
};

struct StochasticGdaConfig {
  GdaConfig gda;
  int batch_size = 32;
  Baseline baseline = Baseline::kNone;
  KlEstimator kl_estimator = KlEstimator::kLikelihoodRatio;
  uint64_t seed = 0;

  void Validate() const;
};

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double exploitability = 0.0;  // DualityGap of the current iterate
  double stationarity = 0.0;

  bool operator==(const TraceRow&) const = default;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
  Policy last_leader;
  ConditionalPolicy last_follower;
  Policy average_leader;
  ConditionalPolicy average_follower;
  int iterations = 0;
  bool converged = false;
};

// Columns: iteration,objective,exploitability,stationarity
void WriteTraceCsv(const SolveTrace& trace, std::ostream& out);

struct GdaResult {
  SolveTrace trace;
  // Built from the averaged iterates.
  StackelbergSolution solution;
};

// The objective became non-finite; the trace up to that point is attached.
class GdaDivergence : public SolveError {
 public:
  GdaDivergence(const std::string& message, SolveTrace trace)
      : SolveError("stackelberg_gda", message), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

// Two-timescale projected gradient ascent (leader) / descent (follower).
GdaResult StackelbergGda(const PreferenceMatrix& p, const ReferencePair& refs,
                         const GdaConfig& config);

// Sampled score-function variant on tabular logits.
GdaResult StackelbergGdaStochastic(const PreferenceMatrix& p,
                                   const ReferencePair& refs,
                                   const StochasticGdaConfig& config);

// Gradients with respect to the logits theta(x, .) and phi(x, y, .).
struct LogitGradient {
  LeaderTable leader;
  FollowerTable follower;
};

// One batch estimate at fixed policies (the same estimator the stochastic
// solver uses).
LogitGradient SampleLogitGradient(const PreferenceMatrix& p, const Policy& leader,
                                  const ConditionalPolicy& follower,
                                  const ReferencePair& refs,
                                  const StochasticGdaConfig& config, Rng& rng);

// Exact expectation of the estimator, by enumeration over (x, y, y').
// Ignores the baseline, which only rescales the expectation by (1 - 1/B).
LogitGradient ExpectedLogitGradient(const PreferenceMatrix& p,
                                    const Policy& leader,
                                    const ConditionalPolicy& follower,
                                    const ReferencePair& refs,
                                    const StochasticGdaConfig& config);

// Chain rule through the softmax: dtheta = (diag(pi) - pi pi^T) df/dpi.
LogitGradient SoftmaxChainRule(const SlhfGradient& gradient,
                               const Policy& leader,
                               const ConditionalPolicy& follower);

}  // namespace slhf

#endif  // SLHF_STACKELBERG_H_
