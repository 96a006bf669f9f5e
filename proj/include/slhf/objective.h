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

#ifndef SLHF_OBJECTIVE_H_
#define SLHF_OBJECTIVE_H_

#include "slhf/policy.h"
#include "slhf/preference.h"

namespace slhf {

// Whether the leader's gradient (and closed form) sees the follower's KL
// penalty, which the objective places inside E_{y~pi}.
enum class LeaderCoupling {
  kIncludeFollowerKl,
  kExcludeFollowerKl,
};

struct Regularization {
  double tau_leader = 0.0;
  double tau_follower = 0.0;
  LeaderCoupling coupling = LeaderCoupling::kIncludeFollowerKl;
};

// f(pi, omega) = E_x[ E_{y~pi}[ E_{y'~omega}[P(y > y')] + tau_F KL_{x,y} ]
//                     - tau_L KL_x(pi || pi_ref) ].
double SlhfObjective(const PreferenceMatrix& p, const Policy& leader,
                     const ConditionalPolicy& follower,
                     const ReferencePair& refs, double tau_leader,
                     double tau_follower);

// Same, on raw tables. Entries need not be normalised, which lets finite
// differences probe off the simplex; KL terms use sum p log(p / q).
double SlhfObjective(const PreferenceMatrix& p, const LeaderTable& leader,
                     const FollowerTable& follower, const ReferencePair& refs,
                     const Regularization& reg);

struct SlhfGradient {
  LeaderTable leader;      // df / d pi(y | x)
  FollowerTable follower;  // df / d omega(y' | x, y)
};

// Exact partial derivatives of SlhfObjective with respect to every table
// entry. Logs are taken of max(entry, kProbabilityFloor).
SlhfGradient SlhfGradients(const PreferenceMatrix& p, const LeaderTable& leader,
                           const FollowerTable& follower,
                           const ReferencePair& refs, const Regularization& reg);

// In-place variant; `out` is resized on first use. Skips shape checks.
void SlhfGradientsInto(const PreferenceMatrix& p, const LeaderTable& leader,
                       const FollowerTable& follower, const ReferencePair& refs,
                       const Regularization& reg, SlhfGradient& out);

// Norm of the projected-gradient mapping
//   (pi - Proj(pi + g_pi), omega - Proj(omega - g_omega)),
// zero exactly at a saddle point of f over the simplices.
double StationarityResidual(const LeaderTable& leader,
                            const FollowerTable& follower,
                            const SlhfGradient& gradient);

// max_{pi'} f(pi', omega) - min_{omega'} f(pi, omega'). Non-negative; zero
// iff (pi, omega) is a saddle point.
double DualityGap(const PreferenceMatrix& p, const LeaderTable& leader,
                  const FollowerTable& follower, const ReferencePair& refs,
                  const Regularization& reg);

// Total variation between the laws of (x, y, y') under (pi_a, omega_a) and
// (pi_b, omega_b), x ~ rho.
double JointPlayTotalVariation(const ActionSpace& space, const LeaderTable& pi_a,
                               const FollowerTable& omega_a,
                               const LeaderTable& pi_b,
                               const FollowerTable& omega_b);

}  // namespace slhf

#endif  // SLHF_OBJECTIVE_H_
