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

#include "slhf/objective.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slhf/error.h"

namespace slhf {
namespace {

double RawKl(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double FlooredLogRatio(double p, double q) {
  return std::log(std::max(p, kProbabilityFloor) / q);
}

void CheckTables(const PreferenceMatrix& p, const LeaderTable& leader,
                 const FollowerTable& follower, const ReferencePair& refs,
                 const Regularization& reg) {
  const ActionSpace& space = p.space();
  if (static_cast<int>(leader.size()) != space.num_contexts() ||
      static_cast<int>(follower.size()) != space.num_contexts()) {
    throw ValidationError("SlhfObjective: context count mismatch");
  }
  for (int x = 0; x < space.num_contexts(); ++x) {
    const size_t n = space.num_actions(x);
    if (leader[x].size() != n || follower[x].size() != n) {
      throw ValidationError("SlhfObjective: action count mismatch");
    }
    for (const auto& row : follower[x]) {
      if (row.size() != n) {
        throw ValidationError("SlhfObjective: follower row size mismatch");
      }
    }
  }
  if (reg.tau_leader < 0.0 || reg.tau_follower < 0.0) {
    throw ValidationError("SlhfObjective: tau must be >= 0");
  }
  if (reg.tau_leader > 0.0 || reg.tau_follower > 0.0) refs.CheckShape(space);
}

// log sum_i w_i exp(z_i), stable.
double LogSumExp(std::span<const double> weights, std::span<const double> z) {
  double shift = -std::numeric_limits<double>::infinity();
  for (double v : z) shift = std::max(shift, v);
  double total = 0.0;
  for (size_t i = 0; i < z.size(); ++i) total += weights[i] * std::exp(z[i] - shift);
  return shift + std::log(total);
}

}  // namespace

double SlhfObjective(const PreferenceMatrix& p, const Policy& leader,
                     const ConditionalPolicy& follower,
                     const ReferencePair& refs, double tau_leader,
                     double tau_follower) {
  leader.CheckShape(p.space());
  follower.CheckShape(p.space());
  return SlhfObjective(p, leader.table(), follower.table(), refs,
                       {tau_leader, tau_follower});
}

double SlhfObjective(const PreferenceMatrix& p, const LeaderTable& leader,
                     const FollowerTable& follower, const ReferencePair& refs,
                     const Regularization& reg) {
  CheckTables(p, leader, follower, refs, reg);
  double value = 0.0;
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    const int n = m.size();
    double inner = 0.0;
    for (int y = 0; y < n; ++y) {
      double response = 0.0;
      for (int r = 0; r < n; ++r) response += follower[x][y][r] * m(y, r);
      if (reg.tau_follower > 0.0) {
        response += reg.tau_follower *
                    RawKl(follower[x][y], refs.follower()(x, y));
      }
      inner += leader[x][y] * response;
    }
    if (reg.tau_leader > 0.0) {
      inner -= reg.tau_leader * RawKl(leader[x], refs.leader()[x]);
    }
    value += p.space().context_prob(x) * inner;
  }
  return value;
}

SlhfGradient SlhfGradients(const PreferenceMatrix& p, const LeaderTable& leader,
                           const FollowerTable& follower,
                           const ReferencePair& refs, const Regularization& reg) {
  CheckTables(p, leader, follower, refs, reg);
  SlhfGradient g;
  SlhfGradientsInto(p, leader, follower, refs, reg, g);
  return g;
}

void SlhfGradientsInto(const PreferenceMatrix& p, const LeaderTable& leader,
                       const FollowerTable& follower, const ReferencePair& refs,
                       const Regularization& reg, SlhfGradient& g) {
  const int num_contexts = p.num_contexts();
  if (static_cast<int>(g.leader.size()) != num_contexts) {
    g.leader.resize(num_contexts);
    g.follower.resize(num_contexts);
    for (int x = 0; x < num_contexts; ++x) {
      const int n = p.num_actions(x);
      g.leader[x].assign(n, 0.0);
      g.follower[x].assign(n, std::vector<double>(n, 0.0));
    }
  }
  const bool leader_sees_kl = reg.tau_follower > 0.0 &&
      reg.coupling == LeaderCoupling::kIncludeFollowerKl;
  for (int x = 0; x < num_contexts; ++x) {
    const SquareMatrix& m = p.context(x);
    const int n = m.size();
    const double rho = p.space().context_prob(x);
    for (int y = 0; y < n; ++y) {
      const auto& row = follower[x][y];
      auto& follower_grad = g.follower[x][y];
      const double weight = rho * leader[x][y];
      double response = 0.0;
      double kl = 0.0;
      for (int r = 0; r < n; ++r) {
        response += row[r] * m(y, r);
        double entry = m(y, r);
        if (reg.tau_follower > 0.0) {
          const double log_ratio =
              FlooredLogRatio(row[r], refs.follower()(x, y, r));
          if (row[r] > 0.0) {
            kl += row[r] * std::log(row[r] / refs.follower()(x, y, r));
          }
          entry += reg.tau_follower * (log_ratio + 1.0);
        }
        follower_grad[r] = weight * entry;
      }
      if (leader_sees_kl) response += reg.tau_follower * kl;
      double leader_grad = response;
      if (reg.tau_leader > 0.0) {
        leader_grad -= reg.tau_leader *
                       (FlooredLogRatio(leader[x][y], refs.leader()(x, y)) + 1.0);
      }
      g.leader[x][y] = rho * leader_grad;
    }
  }
}

double StationarityResidual(const LeaderTable& leader,
                            const FollowerTable& follower,
                            const SlhfGradient& gradient) {
  double total = 0.0;
  std::vector<double> step;
  for (size_t x = 0; x < leader.size(); ++x) {
    const size_t n = leader[x].size();
    step.resize(n);
    for (size_t y = 0; y < n; ++y) step[y] = leader[x][y] + gradient.leader[x][y];
    auto projected = ProjectSimplex(step);
    for (size_t y = 0; y < n; ++y) {
      const double d = leader[x][y] - projected[y];
      total += d * d;
    }
    for (size_t y = 0; y < n; ++y) {
      for (size_t r = 0; r < n; ++r) {
        step[r] = follower[x][y][r] - gradient.follower[x][y][r];
      }
      projected = ProjectSimplex(step);
      for (size_t r = 0; r < n; ++r) {
        const double d = follower[x][y][r] - projected[r];
        total += d * d;
      }
    }
  }
  return std::sqrt(total);
}

double DualityGap(const PreferenceMatrix& p, const LeaderTable& leader,
                  const FollowerTable& follower, const ReferencePair& refs,
                  const Regularization& reg) {
  CheckTables(p, leader, follower, refs, reg);
  double best_leader = 0.0;   // max_{pi'} f(pi', omega)
  double best_follower = 0.0; // min_{omega'} f(pi, omega')
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    const int n = m.size();
    const double rho = p.space().context_prob(x);
    std::vector<double> payoff(n), minimum(n), scaled(n);
    for (int y = 0; y < n; ++y) {
      double response = 0.0;
      for (int r = 0; r < n; ++r) response += follower[x][y][r] * m(y, r);
      if (reg.tau_follower > 0.0) {
        response += reg.tau_follower *
                    RawKl(follower[x][y], refs.follower()(x, y));
      }
      payoff[y] = response;

      if (reg.tau_follower > 0.0) {
        for (int r = 0; r < n; ++r) scaled[r] = -m(y, r) / reg.tau_follower;
        minimum[y] = -reg.tau_follower * LogSumExp(refs.follower()(x, y), scaled);
      } else {
        double lowest = m(y, 0);
        for (int r = 1; r < n; ++r) lowest = std::min(lowest, m(y, r));
        minimum[y] = lowest;
      }
    }
    double leader_value;
    if (reg.tau_leader > 0.0) {
      for (int y = 0; y < n; ++y) scaled[y] = payoff[y] / reg.tau_leader;
      leader_value = reg.tau_leader * LogSumExp(refs.leader()[x], scaled);
    } else {
      leader_value = *std::max_element(payoff.begin(), payoff.end());
    }
    double follower_value = 0.0;
    for (int y = 0; y < n; ++y) follower_value += leader[x][y] * minimum[y];
    if (reg.tau_leader > 0.0) {
      follower_value -= reg.tau_leader * RawKl(leader[x], refs.leader()[x]);
    }
    best_leader += rho * leader_value;
    best_follower += rho * follower_value;
  }
  return std::max(best_leader - best_follower, 0.0);
}

double JointPlayTotalVariation(const ActionSpace& space, const LeaderTable& pi_a,
                               const FollowerTable& omega_a,
                               const LeaderTable& pi_b,
                               const FollowerTable& omega_b) {
  double total = 0.0;
  for (int x = 0; x < space.num_contexts(); ++x) {
    double context_sum = 0.0;
    const int n = space.num_actions(x);
    for (int y = 0; y < n; ++y) {
      for (int r = 0; r < n; ++r) {
        context_sum += std::abs(pi_a[x][y] * omega_a[x][y][r] -
                                pi_b[x][y] * omega_b[x][y][r]);
      }
    }
    total += space.context_prob(x) * 0.5 * context_sum;
  }
  return total;
}

}  // namespace slhf
