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

#include "slhf/stackelberg.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace slhf {
namespace {

// Pooled state shared by the deterministic and sampled solvers: the current
// iterate, running averages and the trace.
class IterateTracker {
 public:
  IterateTracker(const PreferenceMatrix& p, const ReferencePair& refs,
                 const GdaConfig& config)
      : p_(p), refs_(refs), config_(config), reg_(config.regularization()) {
    const int window =
        config.average_window > 0 ? config.average_window
                                  : std::max(1, config.max_iters / 2);
    average_from_ = std::max(1, config.max_iters - window + 1);
  }

  // Returns true when the stopping rule fires. `iteration` counts completed
  // updates.
  bool Record(int iteration, const LeaderTable& pi, const FollowerTable& omega,
              bool force) {
    trace_.iterations = iteration;
    if (!force && iteration % config_.record_every != 0) return false;
    SlhfGradientsInto(p_, pi, omega, refs_, reg_, gradient_);
    TraceRow row;
    row.iteration = iteration;
    row.objective = SlhfObjective(p_, pi, omega, refs_, reg_);
    if (!std::isfinite(row.objective)) {
      trace_.rows.push_back(row);
      throw GdaDivergence("objective became non-finite at iteration " +
                              std::to_string(iteration),
                          trace_);
    }
    row.exploitability = DualityGap(p_, pi, omega, refs_, reg_);
    row.stationarity = StationarityResidual(pi, omega, gradient_);
    trace_.rows.push_back(row);
    if (row.stationarity <= config_.stop_tolerance) {
      trace_.converged = true;
      return true;
    }
    return false;
  }

  void Accumulate(int iteration, const LeaderTable& pi,
                  const FollowerTable& omega) {
    if (iteration < average_from_) return;
    if (averaged_ == 0) {
      sum_pi_ = pi;
      sum_omega_ = omega;
    } else {
      for (size_t x = 0; x < pi.size(); ++x) {
        for (size_t y = 0; y < pi[x].size(); ++y) {
          sum_pi_[x][y] += pi[x][y];
          for (size_t r = 0; r < pi[x].size(); ++r) {
            sum_omega_[x][y][r] += omega[x][y][r];
          }
        }
      }
    }
    averaged_++;
  }

  GdaResult Finish(const LeaderTable& pi, const FollowerTable& omega) {
    trace_.last_leader = Policy(pi);
    trace_.last_follower = ConditionalPolicy(omega);
    if (averaged_ == 0) {
      trace_.average_leader = trace_.last_leader;
      trace_.average_follower = trace_.last_follower;
    } else {
      const double scale = 1.0 / averaged_;
      for (auto& row : sum_pi_) {
        for (double& v : row) v *= scale;
      }
      for (auto& rows : sum_omega_) {
        for (auto& row : rows) {
          for (double& v : row) v *= scale;
        }
      }
      trace_.average_leader = Policy(std::move(sum_pi_));
      trace_.average_follower = ConditionalPolicy(std::move(sum_omega_));
    }
    GdaResult result;
    result.solution.leader = trace_.average_leader;
    result.solution.follower = trace_.average_follower;
    result.solution.value =
        SlhfObjective(p_, result.solution.leader.table(),
                      result.solution.follower.table(), refs_, reg_);
    result.solution.is_exact = false;
    result.trace = std::move(trace_);
    return result;
  }

  const SolveTrace& trace() const { return trace_; }

 private:
  const PreferenceMatrix& p_;
  const ReferencePair& refs_;
  const GdaConfig& config_;
  const Regularization reg_;
  int average_from_ = 1;
  int averaged_ = 0;
  LeaderTable sum_pi_;
  FollowerTable sum_omega_;
  SlhfGradient gradient_;
  SolveTrace trace_;
};

void InitialIterates(const PreferenceMatrix& p, const ReferencePair& refs,
                     const GdaConfig& config, LeaderTable& pi,
                     FollowerTable& omega) {
  refs.CheckShape(p.space());
  const Policy& leader = config.init_leader ? *config.init_leader : refs.leader();
  const ConditionalPolicy& follower =
      config.init_follower ? *config.init_follower : refs.follower();
  leader.CheckShape(p.space());
  follower.CheckShape(p.space());
  pi = leader.table();
  omega = follower.table();
}

bool AllFinite(std::span<const double> v) {
  double total = 0.0;
  for (double value : v) total += value;
  return std::isfinite(total);
}

void SoftmaxRow(std::span<const double> logits, std::span<double> out) {
  double shift = logits[0];
  for (double l : logits) shift = std::max(shift, l);
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    total += out[i];
  }
  for (double& v : out) v /= total;
}

double LeaderSignal(const StochasticGdaConfig& config, double preference,
                    double pi, double pi_ref, double omega, double omega_ref) {
  const GdaConfig& gda = config.gda;
  if (config.kl_estimator == KlEstimator::kLikelihoodRatio) {
    return preference - gda.tau_leader * (pi / pi_ref);
  }
  double signal = preference;
  if (gda.tau_leader > 0.0) {
    signal -= gda.tau_leader * std::log(std::max(pi, kProbabilityFloor) / pi_ref);
  }
  if (gda.tau_follower > 0.0 &&
      gda.coupling == LeaderCoupling::kIncludeFollowerKl) {
    signal += gda.tau_follower *
              std::log(std::max(omega, kProbabilityFloor) / omega_ref);
  }
  return signal;
}

double FollowerSignal(const StochasticGdaConfig& config, double preference,
                      double omega, double omega_ref) {
  const GdaConfig& gda = config.gda;
  if (config.kl_estimator == KlEstimator::kLikelihoodRatio) {
    return preference - gda.tau_follower * (omega / omega_ref);
  }
  if (gda.tau_follower == 0.0) return preference;
  return preference + gda.tau_follower *
                          std::log(std::max(omega, kProbabilityFloor) / omega_ref);
}

void ZeroLike(const LeaderTable& pi, LogitGradient& g) {
  g.leader.resize(pi.size());
  g.follower.resize(pi.size());
  for (size_t x = 0; x < pi.size(); ++x) {
    const size_t n = pi[x].size();
    g.leader[x].assign(n, 0.0);
    g.follower[x].resize(n);
    for (auto& row : g.follower[x]) row.assign(n, 0.0);
  }
}

struct Sample {
  int x, y, response;
  double leader_signal, follower_signal;
};

// One batch of the score-function estimator, accumulated into `g` (zeroed
// here).
void EstimateBatch(const PreferenceMatrix& p, const LeaderTable& pi,
                   const FollowerTable& omega, const ReferencePair& refs,
                   const StochasticGdaConfig& config, Rng& rng,
                   std::vector<Sample>& batch, LogitGradient& g) {
  ZeroLike(pi, g);
  const auto& rho = p.space().context_dist();
  batch.clear();
  for (int b = 0; b < config.batch_size; ++b) {
    Sample s;
    s.x = SampleCategorical(rho, rng);
    s.y = SampleCategorical(pi[s.x], rng);
    s.response = SampleCategorical(omega[s.x][s.y], rng);
    const double preference = p(s.x, s.y, s.response);
    const double pi_ref = refs.leader()(s.x, s.y);
    const double omega_ref = refs.follower()(s.x, s.y, s.response);
    const double omega_value = omega[s.x][s.y][s.response];
    s.leader_signal = LeaderSignal(config, preference, pi[s.x][s.y], pi_ref,
                                   omega_value, omega_ref);
    s.follower_signal =
        FollowerSignal(config, preference, omega_value, omega_ref);
    batch.push_back(s);
  }
  if (config.baseline == Baseline::kBatchMean) {
    double leader_mean = 0.0, follower_mean = 0.0;
    for (const Sample& s : batch) {
      leader_mean += s.leader_signal;
      follower_mean += s.follower_signal;
    }
    leader_mean /= batch.size();
    follower_mean /= batch.size();
    for (Sample& s : batch) {
      s.leader_signal -= leader_mean;
      s.follower_signal -= follower_mean;
    }
  }
  const double scale = 1.0 / config.batch_size;
  for (const Sample& s : batch) {
    // grad log softmax(theta)_y = e_y - pi.
    auto& leader_row = g.leader[s.x];
    const auto& pi_row = pi[s.x];
    const double ls = scale * s.leader_signal;
    for (size_t k = 0; k < pi_row.size(); ++k) leader_row[k] -= ls * pi_row[k];
    leader_row[s.y] += ls;

    auto& follower_row = g.follower[s.x][s.y];
    const auto& omega_row = omega[s.x][s.y];
    const double fs = scale * s.follower_signal;
    for (size_t k = 0; k < omega_row.size(); ++k) {
      follower_row[k] -= fs * omega_row[k];
    }
    follower_row[s.response] += fs;
  }
}

}  // namespace

ConditionalPolicy ExactFollowerResponse(const PreferenceMatrix& p,
                                        const ReferencePair& refs,
                                        double tau_follower) {
  refs.CheckShape(p.space());
  FollowerTable table(p.num_contexts());
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    const int n = m.size();
    std::vector<double> scores(n);
    for (int y = 0; y < n; ++y) {
      for (int r = 0; r < n; ++r) scores[r] = m(r, y);
      table[x].push_back(SoftmaxPolicy(scores, refs.follower()(x, y), tau_follower));
    }
  }
  return ConditionalPolicy(std::move(table));
}

LeaderTable LeaderScores(const PreferenceMatrix& p,
                         const ConditionalPolicy& follower,
                         const ReferencePair& refs, const Regularization& reg) {
  follower.CheckShape(p.space());
  LeaderTable scores(p.num_contexts());
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    const int n = m.size();
    scores[x].assign(n, 0.0);
    for (int y = 0; y < n; ++y) {
      double value = 0.0;
      for (int r = 0; r < n; ++r) value += follower(x, y, r) * m(y, r);
      if (reg.tau_follower > 0.0 &&
          reg.coupling == LeaderCoupling::kIncludeFollowerKl) {
        value += reg.tau_follower *
                 KlDivergence(follower(x, y), refs.follower()(x, y));
      }
      scores[x][y] = value;
    }
  }
  return scores;
}

StackelbergSolution StackelbergExact(const PreferenceMatrix& p,
                                     const ReferencePair& refs,
                                     const Regularization& reg) {
  if (!(reg.tau_leader > 0.0) || !(reg.tau_follower > 0.0)) {
    throw ValidationError(
        "StackelbergExact: both tau must be > 0; use StackelbergEnumerate for "
        "the unregularised game");
  }
  refs.CheckShape(p.space());
  StackelbergSolution solution;
  solution.follower = ExactFollowerResponse(p, refs, reg.tau_follower);
  const LeaderTable scores = LeaderScores(p, solution.follower, refs, reg);
  LeaderTable leader;
  for (int x = 0; x < p.num_contexts(); ++x) {
    leader.push_back(SoftmaxPolicy(scores[x], refs.leader()[x], reg.tau_leader));
  }
  solution.leader = Policy(std::move(leader));
  solution.value = SlhfObjective(p, solution.leader, solution.follower, refs,
                                 reg.tau_leader, reg.tau_follower);
  solution.is_exact = true;
  return solution;
}

DeterministicEquilibria StackelbergEnumerate(const PreferenceMatrix& p) {
  DeterministicEquilibria eq;
  for (int x = 0; x < p.num_contexts(); ++x) {
    const SquareMatrix& m = p.context(x);
    const int n = m.size();
    auto& responses = eq.follower_responses.emplace_back(n);
    auto& commitment = eq.commitment_values.emplace_back(n, 0.0);
    for (int y = 0; y < n; ++y) {
      double lowest = m(y, 0);
      for (int r = 1; r < n; ++r) lowest = std::min(lowest, m(y, r));
      for (int r = 0; r < n; ++r) {
        if (m(y, r) <= lowest + kConstructionTolerance) responses[y].push_back(r);
      }
      commitment[y] = lowest;
    }
    const double best = *std::max_element(commitment.begin(), commitment.end());
    auto& leaders = eq.leader_actions.emplace_back();
    for (int y = 0; y < n; ++y) {
      if (commitment[y] >= best - kConstructionTolerance) leaders.push_back(y);
    }
    eq.values.push_back(best);
    eq.value += p.space().context_prob(x) * best;
  }
  return eq;
}

StackelbergSolution DeterministicEquilibria::Canonical(
    const ActionSpace& space) const {
  std::vector<int> leader;
  std::vector<std::vector<int>> responses;
  for (size_t x = 0; x < leader_actions.size(); ++x) {
    leader.push_back(leader_actions[x].front());
    auto& row = responses.emplace_back();
    for (const auto& ties : follower_responses[x]) row.push_back(ties.front());
  }
  StackelbergSolution solution;
  solution.leader = Policy::Deterministic(space, leader);
  solution.follower = ConditionalPolicy::Deterministic(space, responses);
  solution.value = value;
  solution.is_exact = true;
  return solution;
}

double DeterministicEquilibria::Count() const {
  double count = 1.0;
  for (size_t x = 0; x < leader_actions.size(); ++x) {
    count *= static_cast<double>(leader_actions[x].size());
    for (const auto& ties : follower_responses[x]) {
      count *= static_cast<double>(ties.size());
    }
  }
  return count;
}

void GdaConfig::Validate() const {
  if (!(leader_step >= 0.0) || !std::isfinite(leader_step)) {
    throw ValidationError("GdaConfig: leader_step must be finite and >= 0");
  }
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw ValidationError("GdaConfig: kappa must be >= 1");
  }
  if (!(tau_leader >= 0.0) || !(tau_follower >= 0.0) ||
      !std::isfinite(tau_leader) || !std::isfinite(tau_follower)) {
    throw ValidationError("GdaConfig: tau must be finite and >= 0");
  }
  if (max_iters < 1) throw ValidationError("GdaConfig: max_iters must be >= 1");
  if (average_window < 0) {
    throw ValidationError("GdaConfig: average_window must be >= 0");
  }
  if (record_every < 1) {
    throw ValidationError("GdaConfig: record_every must be >= 1");
  }
  if (!(stop_tolerance >= 0.0)) {
    throw ValidationError("GdaConfig: stop_tolerance must be >= 0");
  }
}

void StochasticGdaConfig::Validate() const {
  gda.Validate();
  if (batch_size < 1) {
    throw ValidationError("StochasticGdaConfig: batch_size must be >= 1");
  }
}

void WriteTraceCsv(const SolveTrace& trace, std::ostream& out) {
  out << "iteration,objective,exploitability,stationarity\n";
  const auto old_precision = out.precision(17);
  for (const TraceRow& row : trace.rows) {
    out << row.iteration << ',' << row.objective << ',' << row.exploitability
        << ',' << row.stationarity << '\n';
  }
  out.precision(old_precision);
}

GdaResult StackelbergGda(const PreferenceMatrix& p, const ReferencePair& refs,
                         const GdaConfig& config) {
  config.Validate();
  LeaderTable pi;
  FollowerTable omega;
  InitialIterates(p, refs, config, pi, omega);
  const Regularization reg = config.regularization();
  const double leader_step = config.leader_step;
  const double follower_step = config.follower_step();

  IterateTracker tracker(p, refs, config);
  SlhfGradient g;
  std::vector<double> scratch;
  for (int iteration = 0;; ++iteration) {
    if (tracker.Record(iteration, pi, omega, iteration == config.max_iters)) break;
    if (iteration == config.max_iters) break;

    SlhfGradientsInto(p, pi, omega, refs, reg, g);
    bool finite = true;
    for (size_t x = 0; x < pi.size(); ++x) {
      auto& leader_row = pi[x];
      for (size_t y = 0; y < leader_row.size(); ++y) {
        leader_row[y] += leader_step * g.leader[x][y];
      }
      ProjectSimplexInPlace(leader_row, scratch);
      finite = finite && AllFinite(leader_row);
      for (size_t y = 0; y < leader_row.size(); ++y) {
        auto& follower_row = omega[x][y];
        const auto& grad = g.follower[x][y];
        for (size_t r = 0; r < follower_row.size(); ++r) {
          follower_row[r] -= follower_step * grad[r];
        }
        ProjectSimplexInPlace(follower_row, scratch);
        finite = finite && AllFinite(follower_row);
      }
    }
    if (!finite) {
      throw GdaDivergence("iterate became non-finite at iteration " +
                              std::to_string(iteration + 1),
                          tracker.trace());
    }
    tracker.Accumulate(iteration + 1, pi, omega);
  }
  return tracker.Finish(pi, omega);
}

GdaResult StackelbergGdaStochastic(const PreferenceMatrix& p,
                                   const ReferencePair& refs,
                                   const StochasticGdaConfig& config) {
  config.Validate();
  const GdaConfig& gda = config.gda;
  LeaderTable pi;
  FollowerTable omega;
  InitialIterates(p, refs, gda, pi, omega);

  // Logits of the floored initial policies.
  LeaderTable theta = pi;
  FollowerTable phi = omega;
  for (size_t x = 0; x < pi.size(); ++x) {
    const auto floored = FloorAndRenormalize(pi[x]);
    for (size_t y = 0; y < floored.size(); ++y) theta[x][y] = std::log(floored[y]);
    SoftmaxRow(theta[x], pi[x]);
    for (size_t y = 0; y < pi[x].size(); ++y) {
      const auto row = FloorAndRenormalize(omega[x][y]);
      for (size_t r = 0; r < row.size(); ++r) phi[x][y][r] = std::log(row[r]);
      SoftmaxRow(phi[x][y], omega[x][y]);
    }
  }

  const double leader_step = gda.leader_step;
  const double follower_step = gda.follower_step();
  Rng rng(config.seed);
  IterateTracker tracker(p, refs, gda);
  LogitGradient g;
  std::vector<Sample> batch;
  for (int iteration = 0;; ++iteration) {
    if (tracker.Record(iteration, pi, omega, iteration == gda.max_iters)) break;
    if (iteration == gda.max_iters) break;

    EstimateBatch(p, pi, omega, refs, config, rng, batch, g);
    bool finite = true;
    for (size_t x = 0; x < pi.size(); ++x) {
      for (size_t y = 0; y < pi[x].size(); ++y) {
        theta[x][y] += leader_step * g.leader[x][y];
        for (size_t r = 0; r < pi[x].size(); ++r) {
          phi[x][y][r] -= follower_step * g.follower[x][y][r];
        }
        SoftmaxRow(phi[x][y], omega[x][y]);
        finite = finite && AllFinite(omega[x][y]);
      }
      SoftmaxRow(theta[x], pi[x]);
      finite = finite && AllFinite(pi[x]);
    }
    if (!finite) {
      throw GdaDivergence("iterate became non-finite at iteration " +
                              std::to_string(iteration + 1),
                          tracker.trace());
    }
    tracker.Accumulate(iteration + 1, pi, omega);
  }
  return tracker.Finish(pi, omega);
}

LogitGradient SampleLogitGradient(const PreferenceMatrix& p, const Policy& leader,
                                  const ConditionalPolicy& follower,
                                  const ReferencePair& refs,
                                  const StochasticGdaConfig& config, Rng& rng) {
  config.Validate();
  leader.CheckShape(p.space());
  follower.CheckShape(p.space());
  refs.CheckShape(p.space());
  LogitGradient g;
  std::vector<Sample> batch;
  EstimateBatch(p, leader.table(), follower.table(), refs, config, rng, batch, g);
  return g;
}

LogitGradient ExpectedLogitGradient(const PreferenceMatrix& p,
                                    const Policy& leader,
                                    const ConditionalPolicy& follower,
                                    const ReferencePair& refs,
                                    const StochasticGdaConfig& config) {
  config.Validate();
  leader.CheckShape(p.space());
  follower.CheckShape(p.space());
  refs.CheckShape(p.space());
  LogitGradient g;
  ZeroLike(leader.table(), g);
  for (int x = 0; x < p.num_contexts(); ++x) {
    const int n = p.num_actions(x);
    const double rho = p.space().context_prob(x);
    for (int y = 0; y < n; ++y) {
      for (int r = 0; r < n; ++r) {
        const double weight = rho * leader(x, y) * follower(x, y, r);
        if (weight == 0.0) continue;
        const double pref = p(x, y, r);
        const double ls =
            weight * LeaderSignal(config, pref, leader(x, y), refs.leader()(x, y),
                                  follower(x, y, r), refs.follower()(x, y, r));
        const double fs =
            weight * FollowerSignal(config, pref, follower(x, y, r),
                                    refs.follower()(x, y, r));
        for (int k = 0; k < n; ++k) {
          g.leader[x][k] += ls * ((k == y ? 1.0 : 0.0) - leader(x, k));
          g.follower[x][y][k] +=
              fs * ((k == r ? 1.0 : 0.0) - follower(x, y, k));
        }
      }
    }
  }
  return g;
}

LogitGradient SoftmaxChainRule(const SlhfGradient& gradient,
                               const Policy& leader,
                               const ConditionalPolicy& follower) {
  LogitGradient g;
  ZeroLike(leader.table(), g);
  for (int x = 0; x < leader.num_contexts(); ++x) {
    const int n = leader.num_actions(x);
    double mean = 0.0;
    for (int y = 0; y < n; ++y) mean += leader(x, y) * gradient.leader[x][y];
    for (int y = 0; y < n; ++y) {
      g.leader[x][y] = leader(x, y) * (gradient.leader[x][y] - mean);
      double row_mean = 0.0;
      for (int r = 0; r < n; ++r) {
        row_mean += follower(x, y, r) * gradient.follower[x][y][r];
      }
      for (int r = 0; r < n; ++r) {
        g.follower[x][y][r] =
            follower(x, y, r) * (gradient.follower[x][y][r] - row_mean);
      }
    }
  }
  return g;
}

}  // namespace slhf
