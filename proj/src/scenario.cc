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

#include "slhf/scenario.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "slhf/cycles.h"
#include "slhf/error.h"
#include "slhf/rng.h"

namespace slhf {
namespace {

namespace fs = std::filesystem;

const std::pair<const char*, const char*> kBundled[] = {
#include "bundled_scenarios.inc"
};

std::string At(const std::string& where, const char* key) {
  return where + "." + key;
}

void CheckKeys(const Json& j, std::initializer_list<const char*> allowed,
               const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ParseError(where + "." + item.key(), "unknown field '" + item.key() + "'");
  }
}

double NumberOr(const Json& j, const char* key, double fallback,
                const std::string& where) {
  return j.contains(key) ? ReadNumber(j.at(key), At(where, key)) : fallback;
}

int IntOr(const Json& j, const char* key, int fallback,
          const std::string& where) {
  return j.contains(key) ? ReadInt(j.at(key), At(where, key)) : fallback;
}

uint64_t ReadSeed(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<uint64_t>();
  if (j.is_number_integer() && j.get<int64_t>() >= 0) {
    return static_cast<uint64_t>(j.get<int64_t>());
  }
  throw ParseError(where, "expected a non-negative integer seed");
}

Json ReadRelative(const Json& j, const std::string& base_dir,
                  const std::string& where) {
  fs::path path(ReadString(j, where));
  if (path.is_relative()) path = fs::path(base_dir) / path;
  if (!fs::exists(path)) {
    throw ParseError(where, "file '" + path.string() + "' does not exist");
  }
  return ReadJsonFile(path.string());
}

// Regularisation block shared by the exact and GDA solvers: "tau" sets both
// coefficients, explicit ones override it.
void ReadTaus(const Json& j, double& tau_leader, double& tau_follower,
              LeaderCoupling& coupling, const std::string& where) {
  if (j.contains("tau")) {
    tau_leader = tau_follower = ReadNumber(j.at("tau"), At(where, "tau"));
  }
  tau_leader = NumberOr(j, "tau_leader", tau_leader, where);
  tau_follower = NumberOr(j, "tau_follower", tau_follower, where);
  if (j.contains("coupling")) {
    const std::string c = ReadString(j.at("coupling"), At(where, "coupling"));
    if (c == "include") {
      coupling = LeaderCoupling::kIncludeFollowerKl;
    } else if (c == "exclude") {
      coupling = LeaderCoupling::kExcludeFollowerKl;
    } else {
      throw ParseError(At(where, "coupling"),
                       "expected 'include' or 'exclude'");
    }
  }
}

GdaConfig ParseGda(const Json& j, const std::string& where) {
  GdaConfig cfg;
  cfg.leader_step = NumberOr(j, "leader_step", cfg.leader_step, where);
  cfg.kappa = NumberOr(j, "kappa", cfg.kappa, where);
  ReadTaus(j, cfg.tau_leader, cfg.tau_follower, cfg.coupling, where);
  cfg.max_iters = IntOr(j, "max_iters", cfg.max_iters, where);
  cfg.average_window = IntOr(j, "average_window", cfg.average_window, where);
  cfg.stop_tolerance = NumberOr(j, "stop_tolerance", cfg.stop_tolerance, where);
  cfg.record_every = IntOr(j, "record_every", cfg.record_every, where);
  try {
    cfg.Validate();
  } catch (const ValidationError& e) {
    throw ParseError(where, e.what());
  }
  return cfg;
}

AnnotatorPopulation ParsePopulation(const Json& j, const std::string& where) {
  if (j.contains("condorcet")) {
    CheckKeys(j, {"condorcet", "actions"}, where);
    const auto w = ReadNumbers(j.at("condorcet"), At(where, "condorcet"));
    if (w.size() != 3) {
      throw ParseError(At(where, "condorcet"), "expected three weights");
    }
    try {
      return AnnotatorPopulation::Condorcet(w[0], w[1], w[2]);
    } catch (const ValidationError& e) {
      throw ParseError(where, e.what());
    }
  }
  CheckKeys(j, {"schema", "rankings", "weights", "actions"}, where);
  return PopulationFromJson(j, where);
}

struct Game {
  PreferenceMatrix p;
  ReferencePair refs;
};

Game BuildGame(const ScenarioConfig& cfg) {
  const Json& g = cfg.game;
  const std::string where = "$.game";
  Game game;
  if (g.contains("population")) {
    const Json& pj = g.at("population");
    const std::string pw = At(where, "population");
    const AnnotatorPopulation population = ParsePopulation(pj, pw);
    std::vector<std::string> actions;
    if (pj.contains("actions")) {
      actions = ReadStrings(pj.at("actions"), At(pw, "actions"));
    } else {
      actions = population.rankings().front();
      std::sort(actions.begin(), actions.end());
    }
    const ActionSpace space = ActionSpace::SingleContext(actions);
    try {
      game.p = AggregatePopulation(population, space);
    } catch (const ValidationError& e) {
      throw ParseError(pw, e.what());
    }
  } else if (g.contains("matrix")) {
    game.p = PreferenceMatrixFromJson(g.at("matrix"), At(where, "matrix"));
  } else if (g.contains("bt_rewards")) {
    const Json& rj = g.at("bt_rewards");
    const std::string rw = At(where, "bt_rewards");
    const ActionSpace space = ActionSpaceFromJson(rj, rw);
    game.p = BtPreference(RewardTableFromJson(rj, space, rw), space);
  } else {
    const Json& rj = g.at("random");
    const std::string rw = At(where, "random");
    CheckKeys(rj, {"contexts", "actions", "seed"}, rw);
    const int contexts = IntOr(rj, "contexts", 1, rw);
    const int actions = IntOr(rj, "actions", 3, rw);
    if (contexts < 1 || actions < 2) {
      throw ParseError(rw, "need contexts >= 1 and actions >= 2");
    }
    Rng rng(ReadSeed(rj.at("seed"), At(rw, "seed")));
    game.p = RandomPreferenceMatrix(
        ActionSpace::Shared(contexts, DefaultActionLabels(actions)), rng);
  }

  const ActionSpace& space = game.p.space();
  if (cfg.references.is_string()) {
    if (cfg.references.get<std::string>() != "uniform") {
      throw ParseError("$.references", "expected \"uniform\" or an object");
    }
    game.refs = ReferencePair::Uniform(space);
  } else {
    const std::string rw = "$.references";
    CheckKeys(cfg.references, {"leader", "follower"}, rw);
    Policy leader = PolicyFromJson(RequireField(cfg.references, "leader", rw),
                                   space, At(rw, "leader"));
    ConditionalPolicy follower = ConditionalPolicyFromJson(
        RequireField(cfg.references, "follower", rw), space,
        At(rw, "follower"));
    try {
      game.refs = ReferencePair(std::move(leader), std::move(follower));
    } catch (const ValidationError& e) {
      throw ParseError(rw, e.what());
    }
  }
  return game;
}

std::vector<TargetSpec> ResolveTargets(const RefinementSpec& spec,
                                       const ActionSpace& space) {
  std::vector<TargetSpec> out;
  for (const TargetEntry& t : spec.targets) {
    if (t.rewards) {
      out.push_back(
          TargetSpec::TopActions(RewardTableFromJson(*t.rewards, space)));
      continue;
    }
    std::vector<std::vector<std::string>> labels = t.sets;
    if (labels.size() == 1 && space.num_contexts() > 1) {
      labels.assign(space.num_contexts(), labels.front());
    }
    if (static_cast<int>(labels.size()) != space.num_contexts()) {
      throw ValidationError("target '" + t.name +
                            "' needs one action set per context");
    }
    std::vector<std::vector<int>> sets(labels.size());
    for (int x = 0; x < space.num_contexts(); ++x) {
      for (const auto& label : labels[x]) {
        sets[x].push_back(space.ActionIndex(x, label));
      }
    }
    out.push_back(TargetSpec::FromSets(std::move(sets)));
  }
  return out;
}

Policy Marginal(const Policy& leader, const ConditionalPolicy& follower) {
  LeaderTable table(leader.num_contexts());
  for (int x = 0; x < leader.num_contexts(); ++x) {
    const int n = leader.num_actions(x);
    table[x].assign(n, 0.0);
    for (int y = 0; y < n; ++y) {
      for (int r = 0; r < n; ++r) table[x][r] += leader(x, y) * follower(x, y, r);
    }
    double total = 0.0;
    for (double v : table[x]) total += v;
    for (double& v : table[x]) v /= total;
  }
  return Policy(std::move(table));
}

Json Labels(const ActionSpace& space, int x, const std::vector<int>& actions) {
  Json out = Json::array();
  for (int y : actions) out.push_back(space.actions(x)[y]);
  return out;
}

Json EnumerationDiagnostics(const DeterministicEquilibria& eq,
                            const ActionSpace& space) {
  Json contexts = Json::array();
  for (int x = 0; x < space.num_contexts(); ++x) {
    Json map = Json::object();
    for (int y = 0; y < space.num_actions(x); ++y) {
      map[space.actions(x)[y]] = Labels(space, x, eq.follower_responses[x][y]);
    }
    contexts.push_back({{"label", space.context(x)},
                        {"leader_actions", Labels(space, x, eq.leader_actions[x])},
                        {"follower_map", map},
                        {"commitment_values", eq.commitment_values[x]},
                        {"value", eq.values[x]}});
  }
  return {{"value", eq.value}, {"count", eq.Count()}, {"contexts", contexts}};
}

void AddSlhfEntries(RunReport& report, const std::string& solver,
                    const Policy& leader, const ConditionalPolicy& follower,
                    Json diagnostics) {
  SolutionEntry entry;
  entry.id = solver + "/leader";
  entry.solver = solver;
  entry.policy = leader;
  entry.follower = follower;
  entry.diagnostics = std::move(diagnostics);
  report.solutions.push_back(std::move(entry));
  SolutionEntry refined;
  refined.id = solver + "/refined";
  refined.solver = solver;
  refined.policy = Marginal(leader, follower);
  report.solutions.push_back(std::move(refined));
}

Json GdaDiagnostics(const GdaResult& result, const ActionSpace& space) {
  const SolveTrace& trace = result.trace;
  Json j = {{"value", result.solution.value},
            {"iterations", trace.iterations},
            {"converged", trace.converged}};
  if (!trace.rows.empty()) {
    const TraceRow& last = trace.rows.back();
    j["final_objective"] = last.objective;
    j["final_exploitability"] = last.exploitability;
    j["final_stationarity"] = last.stationarity;
  }
  j["last_leader"] = PolicyToJson(trace.last_leader, space);
  j["last_follower"] = ConditionalPolicyToJson(trace.last_follower, space);
  return j;
}

std::string Format(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

std::string JoinProbs(const Policy& pi) {
  std::string out;
  for (int x = 0; x < pi.num_contexts(); ++x) {
    if (x > 0) out += '|';
    for (int y = 0; y < pi.num_actions(x); ++y) {
      if (y > 0) out += ';';
      out += Format(pi(x, y));
    }
  }
  return out;
}

const SolutionEntry* FindSolution(const RunReport& report,
                                  const std::string& id) {
  for (const SolutionEntry& s : report.solutions) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

}  // namespace

ScenarioConfig ScenarioConfig::FromJson(const Json& j,
                                        const std::string& base_dir) {
  const std::string where = "$";
  CheckKeys(j,
            {"schema_version", "name", "seed", "game", "references", "solvers",
             "refinement", "output"},
            where);
  ScenarioConfig cfg;
  cfg.source = j;
  if (j.contains("schema_version")) {
    const std::string tag =
        ReadString(j.at("schema_version"), At(where, "schema_version"));
    if (tag != kScenarioSchema) {
      throw ParseError(At(where, "schema_version"),
                       "unsupported schema '" + tag + "'");
    }
  } else {
    cfg.source["schema_version"] = kScenarioSchema;
  }
  cfg.name = j.contains("name") ? ReadString(j.at("name"), At(where, "name"))
                                : "scenario";
  if (j.contains("seed")) cfg.seed = ReadSeed(j.at("seed"), At(where, "seed"));
  bool needs_seed = false;
  auto derived = [&](const char* stream) {
    needs_seed = true;
    return cfg.seed ? DeriveSeed(*cfg.seed, stream) : 0;
  };

  // Game: exactly one source. Files are inlined so the echo is
  // self-contained.
  const std::string gw = At(where, "game");
  Json game = RequireField(j, "game", where);
  if (!game.is_object()) throw ParseError(gw, "expected an object");
  if (game.contains("matrix_file")) {
    game["matrix"] = ReadRelative(game.at("matrix_file"), base_dir,
                                  At(gw, "matrix_file"));
    game.erase("matrix_file");
  }
  if (game.contains("bt_rewards_file")) {
    game["bt_rewards"] = ReadRelative(game.at("bt_rewards_file"), base_dir,
                                      At(gw, "bt_rewards_file"));
    game.erase("bt_rewards_file");
  }
  CheckKeys(game, {"population", "matrix", "bt_rewards", "random"}, gw);
  if (game.size() != 1) {
    throw ParseError(gw, "exactly one of population, matrix, bt_rewards, "
                         "random is required");
  }
  if (game.contains("random")) {
    Json& random = game["random"];
    if (!random.is_object()) throw ParseError(At(gw, "random"), "expected an object");
    if (!random.contains("seed")) random["seed"] = derived("game");
  }
  cfg.game = game;
  cfg.source["game"] = game;
  cfg.references = j.contains("references") ? j.at("references") : Json("uniform");

  if (j.contains("solvers")) {
    const std::string sw = At(where, "solvers");
    const Json& solvers = j.at("solvers");
    CheckKeys(solvers,
              {"rlhf", "nlhf", "slhf_exact", "slhf_enumerate", "slhf_gda",
               "slhf_gda_stochastic"},
              sw);
    if (solvers.contains("rlhf")) {
      const std::string w = At(sw, "rlhf");
      Json r = solvers.at("rlhf");
      CheckKeys(r, {"tau", "lambda", "tolerance", "max_iters", "dataset",
                    "dataset_file"},
                w);
      if (r.contains("dataset_file")) {
        r["dataset"] = ReadRelative(r.at("dataset_file"), base_dir,
                                    At(w, "dataset_file"));
        r.erase("dataset_file");
        cfg.source["solvers"]["rlhf"] = r;
      }
      RlhfSpec spec;
      spec.tau = NumberOr(r, "tau", spec.tau, w);
      spec.fit.lambda = NumberOr(r, "lambda", spec.fit.lambda, w);
      spec.fit.tolerance = NumberOr(r, "tolerance", spec.fit.tolerance, w);
      spec.fit.max_iters = IntOr(r, "max_iters", spec.fit.max_iters, w);
      spec.dataset =
          DatasetFromJson(RequireField(r, "dataset", w), At(w, "dataset"));
      cfg.rlhf = std::move(spec);
    }
    if (solvers.contains("nlhf")) {
      const std::string w = At(sw, "nlhf");
      const Json& n = solvers.at("nlhf");
      CheckKeys(n, {"tau", "method", "max_iters", "tolerance"}, w);
      NashOptions options;
      options.tau = NumberOr(n, "tau", 0.0, w);
      options.method = options.tau > 0.0 ? NashMethod::kRegularizedFixedPoint
                                         : NashMethod::kLpExact;
      if (n.contains("method")) {
        const std::string m = ReadString(n.at("method"), At(w, "method"));
        if (m == "lp") {
          options.method = NashMethod::kLpExact;
        } else if (m == "fixed_point") {
          options.method = NashMethod::kRegularizedFixedPoint;
        } else {
          throw ParseError(At(w, "method"), "expected 'lp' or 'fixed_point'");
        }
      }
      options.max_iters = IntOr(n, "max_iters", options.max_iters, w);
      options.tolerance = NumberOr(n, "tolerance", options.tolerance, w);
      cfg.nlhf = options;
    }
    if (solvers.contains("slhf_exact")) {
      const std::string w = At(sw, "slhf_exact");
      const Json& e = solvers.at("slhf_exact");
      CheckKeys(e, {"tau", "tau_leader", "tau_follower", "coupling"}, w);
      Regularization reg{0.01, 0.01, LeaderCoupling::kIncludeFollowerKl};
      ReadTaus(e, reg.tau_leader, reg.tau_follower, reg.coupling, w);
      if (!(reg.tau_leader > 0.0) || !(reg.tau_follower > 0.0)) {
        throw ParseError(w, "both tau must be > 0; use slhf_enumerate for 0");
      }
      cfg.slhf_exact = reg;
    }
    if (solvers.contains("slhf_enumerate")) {
      const std::string w = At(sw, "slhf_enumerate");
      const Json& e = solvers.at("slhf_enumerate");
      CheckKeys(e, {"leader"}, w);
      EnumerateSpec spec;
      if (e.contains("leader")) {
        const std::string mode = ReadString(e.at("leader"), At(w, "leader"));
        if (mode == "canonical") {
          spec.uniform_over_ties = false;
        } else if (mode != "uniform_ties") {
          throw ParseError(At(w, "leader"),
                           "expected 'uniform_ties' or 'canonical'");
        }
      }
      cfg.slhf_enumerate = spec;
    }
    if (solvers.contains("slhf_gda")) {
      const std::string w = At(sw, "slhf_gda");
      const Json& g = solvers.at("slhf_gda");
      CheckKeys(g, {"leader_step", "kappa", "tau", "tau_leader", "tau_follower",
                    "max_iters", "average_window", "stop_tolerance",
                    "record_every", "coupling"},
                w);
      cfg.slhf_gda = ParseGda(g, w);
    }
    if (solvers.contains("slhf_gda_stochastic")) {
      const std::string w = At(sw, "slhf_gda_stochastic");
      Json g = solvers.at("slhf_gda_stochastic");
      CheckKeys(g, {"leader_step", "kappa", "tau", "tau_leader", "tau_follower",
                    "max_iters", "average_window", "stop_tolerance",
                    "record_every", "coupling", "batch_size", "baseline",
                    "kl_estimator", "seed"},
                w);
      if (!g.contains("seed")) {
        g["seed"] = derived("slhf_gda_stochastic");
        cfg.source["solvers"]["slhf_gda_stochastic"] = g;
      }
      StochasticGdaConfig s;
      s.gda = ParseGda(g, w);
      s.batch_size = IntOr(g, "batch_size", s.batch_size, w);
      s.seed = ReadSeed(g.at("seed"), At(w, "seed"));
      if (g.contains("baseline")) {
        const std::string b = ReadString(g.at("baseline"), At(w, "baseline"));
        if (b == "batch_mean") {
          s.baseline = Baseline::kBatchMean;
        } else if (b != "none") {
          throw ParseError(At(w, "baseline"), "expected 'none' or 'batch_mean'");
        }
      }
      if (g.contains("kl_estimator")) {
        const std::string k =
            ReadString(g.at("kl_estimator"), At(w, "kl_estimator"));
        if (k == "exact") {
          s.kl_estimator = KlEstimator::kExactGradient;
        } else if (k != "likelihood_ratio") {
          throw ParseError(At(w, "kl_estimator"),
                           "expected 'likelihood_ratio' or 'exact'");
        }
      }
      try {
        s.Validate();
      } catch (const ValidationError& e) {
        throw ParseError(w, e.what());
      }
      cfg.slhf_gda_stochastic = std::move(s);
    }
  }

  if (j.contains("refinement")) {
    const std::string w = At(where, "refinement");
    Json r = j.at("refinement");
    CheckKeys(r, {"targets", "n_values", "trials", "seed"}, w);
    RefinementSpec spec;
    const std::string tw = At(w, "targets");
    const Json& targets = RequireField(r, "targets", w);
    if (!targets.is_array() || targets.empty()) {
      throw ParseError(tw, "expected a non-empty array");
    }
    for (size_t i = 0; i < targets.size(); ++i) {
      const std::string ew = tw + "[" + std::to_string(i) + "]";
      const Json& t = targets[i];
      CheckKeys(t, {"name", "sets", "rewards"}, ew);
      TargetEntry entry;
      entry.name = t.contains("name") ? ReadString(t.at("name"), At(ew, "name"))
                                      : "target" + std::to_string(i);
      if (t.contains("rewards") == t.contains("sets")) {
        throw ParseError(ew, "exactly one of sets or rewards is required");
      }
      if (t.contains("sets")) {
        const Json& sets = t.at("sets");
        if (!sets.is_array() || sets.empty()) {
          throw ParseError(At(ew, "sets"), "expected a non-empty array");
        }
        for (size_t k = 0; k < sets.size(); ++k) {
          entry.sets.push_back(ReadStrings(
              sets[k], At(ew, "sets") + "[" + std::to_string(k) + "]"));
          if (entry.sets.back().empty()) {
            throw ParseError(At(ew, "sets"), "empty target set");
          }
        }
      } else {
        entry.rewards = t.at("rewards");
      }
      spec.targets.push_back(std::move(entry));
    }
    const Json& ns = RequireField(r, "n_values", w);
    if (!ns.is_array() || ns.empty()) {
      throw ParseError(At(w, "n_values"), "expected a non-empty array");
    }
    for (size_t i = 0; i < ns.size(); ++i) {
      const int n = ReadInt(ns[i], At(w, "n_values"));
      if (n < 1) throw ParseError(At(w, "n_values"), "N must be >= 1");
      spec.n_values.push_back(n);
    }
    spec.trials = IntOr(r, "trials", 0, w);
    if (spec.trials < 0) throw ParseError(At(w, "trials"), "must be >= 0");
    if (spec.trials > 0) {
      if (!r.contains("seed")) {
        r["seed"] = derived("refinement");
        cfg.source["refinement"] = r;
      }
      spec.seed = ReadSeed(r.at("seed"), At(w, "seed"));
    }
    cfg.refinement = std::move(spec);
  }

  if (j.contains("output")) {
    const std::string w = At(where, "output");
    const Json& o = j.at("output");
    CheckKeys(o, {"dir", "format"}, w);
    if (o.contains("dir")) cfg.output_dir = ReadString(o.at("dir"), At(w, "dir"));
    if (o.contains("format")) {
      cfg.format = ReadString(o.at("format"), At(w, "format"));
      if (cfg.format != "json" && cfg.format != "csv") {
        throw ParseError(At(w, "format"), "expected 'json' or 'csv'");
      }
    }
  }

  if (needs_seed && !cfg.seed) {
    throw ValidationError(
        "$.seed: a master seed is required because a stochastic component "
        "has no explicit seed");
  }

  // Validate the game, references and targets now rather than at run time.
  const Game built = BuildGame(cfg);
  if (cfg.refinement) ResolveTargets(*cfg.refinement, built.p.space());
  if (cfg.rlhf) cfg.rlhf->dataset.CheckLabels(built.p.space());
  return cfg;
}

RunReport RunScenario(const ScenarioConfig& cfg) {
  RunReport report;
  report.scenario = cfg.name;
  report.config = cfg.ToJson();

  using Clock = std::chrono::steady_clock;
  auto run = [&](const std::string& component, auto&& body) {
    const auto start = Clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      report.errors.push_back({component, e.what()});
    }
    report.timing[component] =
        std::chrono::duration<double>(Clock::now() - start).count();
  };

  Game game;
  bool have_game = false;
  run("game", [&] {
    game = BuildGame(cfg);
    have_game = true;
  });
  if (!have_game) return report;
  report.game = game.p;
  const PreferenceMatrix& p = game.p;
  const ActionSpace& space = p.space();

  struct Process {
    std::string id;
    SamplingProcess process;
  };
  std::vector<Process> processes;
  processes.push_back({"reference", SamplingProcess::Iid(game.refs.leader())});

  if (cfg.rlhf) {
    run("rlhf", [&] {
      const BtFit fit = FitBtMle(cfg.rlhf->dataset, space, cfg.rlhf->fit);
      const RlhfSolution rlhf =
          RlhfPolicy(fit.rewards, game.refs.leader(), cfg.rlhf->tau);
      SolutionEntry entry;
      entry.id = "rlhf";
      entry.solver = "rlhf";
      entry.policy = rlhf.policy;
      entry.diagnostics = {{"rewards", RewardTableToJson(fit.rewards, space)},
                           {"converged", fit.converged},
                           {"iterations", fit.iterations},
                           {"gradient_norm", fit.gradient_norm},
                           {"warnings", fit.warnings},
                           {"argmax_limit", rlhf.argmax_limit}};
      report.solutions.push_back(entry);
      processes.push_back({"rlhf", SamplingProcess::Iid(rlhf.policy)});
    });
  }
  if (cfg.nlhf) {
    run("nlhf", [&] {
      const NashSolution ne = NashSolve(p, game.refs.leader(), *cfg.nlhf);
      SolutionEntry entry;
      entry.id = "nlhf";
      entry.solver = "nlhf";
      entry.policy = ne.policy;
      entry.diagnostics = {{"tau", cfg.nlhf->tau},
                           {"exploitability", ne.exploitability},
                           {"residual", ne.residual},
                           {"iterations", ne.iterations}};
      report.solutions.push_back(entry);
      processes.push_back({"nlhf", SamplingProcess::Iid(ne.policy)});
    });
  }
  auto add_chain = [&](const std::string& solver, const Policy& leader,
                       const ConditionalPolicy& follower) {
    processes.push_back({solver + "/leader", SamplingProcess::Iid(leader)});
    processes.push_back(
        {solver + "/chain", SamplingProcess::Chain(leader, follower)});
  };
  if (cfg.slhf_enumerate) {
    run("slhf_enumerate", [&] {
      const DeterministicEquilibria eq = StackelbergEnumerate(p);
      StackelbergSolution s = eq.Canonical(space);
      Policy leader = s.leader;
      if (cfg.slhf_enumerate->uniform_over_ties) {
        LeaderTable table(space.num_contexts());
        for (int x = 0; x < space.num_contexts(); ++x) {
          table[x].assign(space.num_actions(x), 0.0);
          const double share = 1.0 / eq.leader_actions[x].size();
          for (int y : eq.leader_actions[x]) table[x][y] = share;
        }
        leader = Policy(std::move(table));
      }
      AddSlhfEntries(report, "slhf_enumerate", leader, s.follower,
                     EnumerationDiagnostics(eq, space));
      add_chain("slhf_enumerate", leader, s.follower);
    });
  }
  if (cfg.slhf_exact) {
    run("slhf_exact", [&] {
      const StackelbergSolution s = StackelbergExact(p, game.refs, *cfg.slhf_exact);
      AddSlhfEntries(report, "slhf_exact", s.leader, s.follower,
                     {{"value", s.value},
                      {"tau_leader", cfg.slhf_exact->tau_leader},
                      {"tau_follower", cfg.slhf_exact->tau_follower}});
      add_chain("slhf_exact", s.leader, s.follower);
    });
  }
  if (cfg.slhf_gda) {
    run("slhf_gda", [&] {
      try {
        const GdaResult r = StackelbergGda(p, game.refs, *cfg.slhf_gda);
        report.traces["slhf_gda"] = r.trace.rows;
        AddSlhfEntries(report, "slhf_gda", r.solution.leader,
                       r.solution.follower, GdaDiagnostics(r, space));
        add_chain("slhf_gda", r.solution.leader, r.solution.follower);
      } catch (const GdaDivergence& e) {
        report.traces["slhf_gda"] = e.trace().rows;
        throw;
      }
    });
  }
  if (cfg.slhf_gda_stochastic) {
    run("slhf_gda_stochastic", [&] {
      try {
        const GdaResult r =
            StackelbergGdaStochastic(p, game.refs, *cfg.slhf_gda_stochastic);
        report.traces["slhf_gda_stochastic"] = r.trace.rows;
        AddSlhfEntries(report, "slhf_gda_stochastic", r.solution.leader,
                       r.solution.follower, GdaDiagnostics(r, space));
        add_chain("slhf_gda_stochastic", r.solution.leader, r.solution.follower);
      } catch (const GdaDivergence& e) {
        report.traces["slhf_gda_stochastic"] = e.trace().rows;
        throw;
      }
    });
  }

  run("comparison", [&] {
    std::vector<const Policy*> policies = {&game.refs.leader()};
    report.comparison_ids = {"reference"};
    for (const SolutionEntry& s : report.solutions) {
      report.comparison_ids.push_back(s.id);
      policies.push_back(&s.policy);
    }
    const size_t k = policies.size();
    report.comparison.assign(k, std::vector<double>(k, 0.5));
    for (size_t a = 0; a < k; ++a) {
      for (size_t b = 0; b < k; ++b) {
        if (a != b) {
          report.comparison[a][b] =
              PolicyPreference(p, *policies[a], *policies[b]).average;
        }
      }
    }
  });

  if (cfg.refinement) {
    run("refinement", [&] {
      const RefinementSpec& spec = *cfg.refinement;
      const auto targets = ResolveTargets(spec, space);
      for (size_t t = 0; t < targets.size(); ++t) {
        const std::string& name = spec.targets[t].name;
        for (const Process& proc : processes) {
          for (int n : spec.n_values) {
            RefinementRow row;
            row.policy_id = proc.id;
            row.target = name;
            row.n = n;
            row.analytic = HitProbability(space, proc.process, targets[t], n);
            if (spec.trials > 0) {
              const uint64_t seed = DeriveSeed(
                  *spec.seed, proc.id + "|" + name + "|" + std::to_string(n));
              const Estimate e = HitProbabilityMonteCarlo(
                  space, proc.process, targets[t], n, seed, spec.trials);
              row.estimate = e.value;
              row.std_error = e.std_error;
            }
            report.refinement.push_back(std::move(row));
          }
        }
      }
    });
  }
  return report;
}

Json RunReport::ToJson() const {
  Json j;
  j["schema_version"] = kReportSchema;
  j["scenario"] = scenario;
  j["status"] = failed() ? "failed" : "ok";
  j["config"] = config;
  j["game"] = game ? PreferenceMatrixToJson(*game) : Json(nullptr);
  Json errs = Json::array();
  for (const ComponentError& e : errors) {
    errs.push_back({{"component", e.component}, {"message", e.message}});
  }
  j["errors"] = errs;
  Json sols = Json::array();
  for (const SolutionEntry& s : solutions) {
    const ActionSpace& space = game->space();
    sols.push_back(
        {{"id", s.id},
         {"solver", s.solver},
         {"policy", PolicyToJson(s.policy, space)},
         {"follower", s.follower ? ConditionalPolicyToJson(*s.follower, space)
                                 : Json(nullptr)},
         {"diagnostics", s.diagnostics}});
  }
  j["solutions"] = sols;
  j["comparison"] = {{"ids", comparison_ids}, {"matrix", comparison}};
  Json rows = Json::array();
  for (const RefinementRow& r : refinement) {
    rows.push_back({{"policy_id", r.policy_id},
                    {"target", r.target},
                    {"n", r.n},
                    {"analytic", r.analytic},
                    {"estimate", r.estimate ? Json(*r.estimate) : Json(nullptr)},
                    {"stderr", r.std_error ? Json(*r.std_error) : Json(nullptr)}});
  }
  j["refinement"] = rows;
  j["timing"] = timing;
  return j;
}

RunReport RunReport::FromJson(const Json& j) {
  const std::string where = "$";
  const std::string tag =
      ReadString(RequireField(j, "schema_version", where), "$.schema_version");
  if (tag != kReportSchema) {
    throw ParseError("$.schema_version", "unsupported schema '" + tag + "'");
  }
  RunReport r;
  r.scenario = ReadString(RequireField(j, "scenario", where), "$.scenario");
  r.config = RequireField(j, "config", where);
  const Json& game = RequireField(j, "game", where);
  if (!game.is_null()) r.game = PreferenceMatrixFromJson(game, "$.game");
  for (const Json& e : RequireField(j, "errors", where)) {
    r.errors.push_back({ReadString(RequireField(e, "component", "$.errors"),
                                   "$.errors.component"),
                        ReadString(RequireField(e, "message", "$.errors"),
                                   "$.errors.message")});
  }
  const Json& sols = RequireField(j, "solutions", where);
  if (!sols.empty() && !r.game) {
    throw ParseError("$.solutions", "solutions present without a game");
  }
  for (size_t i = 0; i < sols.size(); ++i) {
    const std::string w = "$.solutions[" + std::to_string(i) + "]";
    const Json& s = sols[i];
    SolutionEntry entry;
    entry.id = ReadString(RequireField(s, "id", w), w + ".id");
    entry.solver = ReadString(RequireField(s, "solver", w), w + ".solver");
    entry.policy = PolicyFromJson(RequireField(s, "policy", w), r.game->space(),
                                  w + ".policy");
    const Json& f = RequireField(s, "follower", w);
    if (!f.is_null()) {
      entry.follower =
          ConditionalPolicyFromJson(f, r.game->space(), w + ".follower");
    }
    entry.diagnostics = RequireField(s, "diagnostics", w);
    r.solutions.push_back(std::move(entry));
  }
  const Json& cmp = RequireField(j, "comparison", where);
  r.comparison_ids =
      ReadStrings(RequireField(cmp, "ids", "$.comparison"), "$.comparison.ids");
  for (const Json& row : RequireField(cmp, "matrix", "$.comparison")) {
    r.comparison.push_back(ReadNumbers(row, "$.comparison.matrix"));
  }
  for (const Json& row : RequireField(j, "refinement", where)) {
    const std::string w = "$.refinement";
    RefinementRow out;
    out.policy_id = ReadString(RequireField(row, "policy_id", w), w);
    out.target = ReadString(RequireField(row, "target", w), w);
    out.n = ReadInt(RequireField(row, "n", w), w);
    out.analytic = ReadNumber(RequireField(row, "analytic", w), w);
    const Json& est = RequireField(row, "estimate", w);
    if (!est.is_null()) out.estimate = ReadNumber(est, w);
    const Json& se = RequireField(row, "stderr", w);
    if (!se.is_null()) out.std_error = ReadNumber(se, w);
    r.refinement.push_back(std::move(out));
  }
  if (j.contains("timing")) r.timing = j.at("timing");
  return r;
}

bool RunReport::SamePayload(const RunReport& other) const {
  return scenario == other.scenario && config == other.config &&
         game == other.game && solutions == other.solutions &&
         comparison_ids == other.comparison_ids &&
         comparison == other.comparison && refinement == other.refinement &&
         errors == other.errors;
}

void WriteReport(const RunReport& report, const std::string& dir,
                 const std::string& format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SolveError("io", "cannot create '" + dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw SolveError("io", "cannot write '" + path + "'");
    out.precision(17);
    return out;
  };
  if (format == "json") {
    WriteJsonFile((fs::path(dir) / "report.json").string(), report.ToJson());
  } else if (format == "csv") {
    {
      auto out = open("solutions.csv");
      out << "id,context,action,prob\n";
      for (const SolutionEntry& s : report.solutions) {
        const ActionSpace& space = report.game->space();
        for (int x = 0; x < space.num_contexts(); ++x) {
          for (int y = 0; y < space.num_actions(x); ++y) {
            out << s.id << ',' << space.context(x) << ','
                << space.actions(x)[y] << ',' << s.policy(x, y) << '\n';
          }
        }
      }
    }
    {
      auto out = open("comparison.csv");
      out << "row,column,preference\n";
      for (size_t a = 0; a < report.comparison_ids.size(); ++a) {
        for (size_t b = 0; b < report.comparison_ids.size(); ++b) {
          out << report.comparison_ids[a] << ',' << report.comparison_ids[b]
              << ',' << report.comparison[a][b] << '\n';
        }
      }
    }
    {
      auto out = open("refinement.csv");
      WriteRefinementCsv(report.refinement, out);
    }
    if (report.failed()) {
      auto out = open("errors.csv");
      out << "component,message\n";
      for (const ComponentError& e : report.errors) {
        std::string message = e.message;
        std::replace(message.begin(), message.end(), ',', ';');
        out << e.component << ',' << message << '\n';
      }
    }
  } else {
    throw ValidationError("unknown output format '" + format + "'");
  }
  for (const auto& [name, rows] : report.traces) {
    auto out = open(name + "_trace.csv");
    SolveTrace trace;
    trace.rows = rows;
    WriteTraceCsv(trace, out);
  }
}

SweepAxis ParseSweepAxis(const std::string& name) {
  if (name == "alpha") return SweepAxis::kAlpha;
  if (name == "tau") return SweepAxis::kTau;
  if (name == "kappa") return SweepAxis::kKappa;
  if (name == "N" || name == "n") return SweepAxis::kN;
  throw ValidationError("unknown sweep axis '" + name +
                        "'; expected alpha, tau, kappa or N");
}

std::vector<std::vector<double>> ParseSweepGrid(SweepAxis axis,
                                                const std::string& grid) {
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(item);
    return out;
  };
  auto number = [](const std::string& s) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) {
      ++used;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw ValidationError("grid value '" + s + "' is not a number");
    }
    return v;
  };
  std::vector<std::vector<double>> points;
  if (axis == SweepAxis::kAlpha) {
    for (const auto& point : split(grid, ';')) {
      std::vector<double> weights;
      for (const auto& v : split(point, ',')) weights.push_back(number(v));
      if (weights.size() != 3) {
        throw ValidationError("alpha grid points need three weights");
      }
      points.push_back(weights);
    }
  } else {
    for (const auto& v : split(grid, ',')) points.push_back({number(v)});
  }
  if (points.empty()) throw ValidationError("sweep grid is empty");
  return points;
}

const std::vector<std::string>& SweepColumns() {
  static const std::vector<std::string> columns = {
      "index",          "axis",
      "value",          "status",
      "enum_leader",    "enum_value",
      "exact_leader",   "exact_tv_to_enum",
      "nlhf_policy",    "nlhf_exploitability",
      "gda_tv_to_exact", "gda_objective",
      "hit_probability", "error"};
  return columns;
}

std::vector<SweepRow> Sweep(const ScenarioConfig& base, SweepAxis axis,
                            const std::vector<std::vector<double>>& grid) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  const Json& solvers = base.source.contains("solvers")
                            ? base.source.at("solvers")
                            : Json::object();
  const char* axis_name = "alpha";
  switch (axis) {
    case SweepAxis::kAlpha:
      if (!base.game.contains("population")) {
        throw ValidationError("alpha sweeps need a population game");
      }
      break;
    case SweepAxis::kTau:
      axis_name = "tau";
      if (!base.slhf_exact && !base.slhf_gda && !base.slhf_gda_stochastic &&
          !base.nlhf && !base.rlhf) {
        throw ValidationError("tau sweeps need a regularised solver");
      }
      break;
    case SweepAxis::kKappa:
      axis_name = "kappa";
      if (!base.slhf_gda && !base.slhf_gda_stochastic) {
        throw ValidationError("kappa sweeps need a GDA solver");
      }
      break;
    case SweepAxis::kN:
      axis_name = "N";
      if (!base.refinement) {
        throw ValidationError("N sweeps need a refinement block");
      }
      break;
  }

  std::vector<SweepRow> rows;
  for (size_t i = 0; i < grid.size(); ++i) {
    SweepRow row;
    row.index = static_cast<int>(i);
    row.axis = axis_name;
    for (size_t k = 0; k < grid[i].size(); ++k) {
      if (k > 0) row.value += ';';
      row.value += Format(grid[i][k]);
    }
    try {
      Json cfg = base.source;
      const auto& v = grid[i];
      switch (axis) {
        case SweepAxis::kAlpha: {
          Json& pop = cfg["game"]["population"];
          if (pop.contains("condorcet")) {
            pop["condorcet"] = v;
          } else {
            if (pop.at("weights").size() != 3) {
              throw ValidationError("alpha sweeps need three annotator types");
            }
            pop["weights"] = v;
          }
          break;
        }
        case SweepAxis::kTau:
          for (const char* s : {"slhf_exact", "slhf_gda", "slhf_gda_stochastic"}) {
            if (!solvers.contains(s)) continue;
            Json& block = cfg["solvers"][s];
            block.erase("tau");
            block["tau_leader"] = v[0];
            block["tau_follower"] = v[0];
          }
          if (solvers.contains("rlhf")) cfg["solvers"]["rlhf"]["tau"] = v[0];
          if (solvers.contains("nlhf")) {
            cfg["solvers"]["nlhf"]["tau"] = v[0];
            cfg["solvers"]["nlhf"]["method"] = v[0] > 0.0 ? "fixed_point" : "lp";
          }
          break;
        case SweepAxis::kKappa:
          for (const char* s : {"slhf_gda", "slhf_gda_stochastic"}) {
            if (solvers.contains(s)) cfg["solvers"][s]["kappa"] = v[0];
          }
          break;
        case SweepAxis::kN:
          if (v[0] < 1.0 || v[0] != std::floor(v[0])) {
            throw ValidationError("N grid values must be positive integers");
          }
          cfg["refinement"]["n_values"] = Json::array({static_cast<int>(v[0])});
          break;
      }
      const ScenarioConfig point = ScenarioConfig::FromJson(cfg);
      const RunReport report = RunScenario(point);
      if (!report.game) throw ValidationError(report.errors.front().message);
      const PreferenceMatrix& p = *report.game;
      const ActionSpace& space = p.space();

      const DeterministicEquilibria eq = StackelbergEnumerate(p);
      std::string leaders;
      for (int x = 0; x < space.num_contexts(); ++x) {
        if (x > 0) leaders += '|';
        for (size_t k = 0; k < eq.leader_actions[x].size(); ++k) {
          if (k > 0) leaders += '/';
          leaders += space.actions(x)[eq.leader_actions[x][k]];
        }
      }
      row.metrics["enum_leader"] = leaders;
      row.metrics["enum_value"] = Format(eq.value);
      const Policy canonical = eq.Canonical(space).leader;

      const SolutionEntry* exact = FindSolution(report, "slhf_exact/leader");
      if (exact) {
        std::string argmax;
        for (int x = 0; x < space.num_contexts(); ++x) {
          if (x > 0) argmax += '|';
          argmax += space.actions(x)[ArgMax(exact->policy[x])];
        }
        row.metrics["exact_leader"] = argmax;
        row.metrics["exact_tv_to_enum"] =
            Format(MaxTotalVariation(exact->policy, canonical));
      }
      if (const SolutionEntry* ne = FindSolution(report, "nlhf")) {
        row.metrics["nlhf_policy"] = JoinProbs(ne->policy);
        const auto expl = Exploitability(p, ne->policy);
        row.metrics["nlhf_exploitability"] =
            Format(*std::max_element(expl.begin(), expl.end()));
      }
      if (const SolutionEntry* gda = FindSolution(report, "slhf_gda/leader")) {
        row.metrics["gda_objective"] = Format(gda->diagnostics.at("value"));
        const GdaConfig& g = *point.slhf_gda;
        if (g.tau_leader > 0.0 && g.tau_follower > 0.0) {
          const ReferencePair refs =
              point.references.is_string()
                  ? ReferencePair::Uniform(space)
                  : ReferencePair(
                        PolicyFromJson(point.references.at("leader"), space),
                        ConditionalPolicyFromJson(point.references.at("follower"),
                                                  space));
          const StackelbergSolution s =
              StackelbergExact(p, refs, g.regularization());
          row.metrics["gda_tv_to_exact"] = Format(JointPlayTotalVariation(
              space, gda->policy.table(), gda->follower->table(),
              s.leader.table(), s.follower.table()));
        }
      }
      const RefinementRow* hit = nullptr;
      for (const RefinementRow& r : report.refinement) {
        const bool chain = r.policy_id.size() > 6 &&
                           r.policy_id.ends_with("/chain");
        if (chain) {
          hit = &r;
          break;
        }
        if (!hit) hit = &r;
      }
      if (hit) row.metrics["hit_probability"] = Format(hit->analytic);
      if (report.failed()) {
        row.status = "failed";
        for (const ComponentError& e : report.errors) {
          if (!row.error.empty()) row.error += "; ";
          row.error += e.component + ": " + e.message;
        }
      } else {
        row.status = "ok";
      }
    } catch (const std::exception& e) {
      row.status = "failed";
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out) {
  const auto& columns = SweepColumns();
  for (size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c];
  }
  out << '\n';
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  for (const SweepRow& row : rows) {
    out << row.index << ',' << row.axis << ',' << quote(row.value) << ','
        << row.status;
    for (size_t c = 4; c + 1 < columns.size(); ++c) {
      auto it = row.metrics.find(columns[c]);
      out << ',' << (it == row.metrics.end() ? "" : quote(it->second));
    }
    out << ',' << quote(row.error) << '\n';
  }
}

Json SweepToJson(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const SweepRow& row : rows) {
    Json j = {{"index", row.index},
              {"axis", row.axis},
              {"value", row.value},
              {"status", row.status}};
    for (const auto& [key, value] : row.metrics) j[key] = value;
    j["error"] = row.error;
    out.push_back(j);
  }
  return {{"schema_version", "slhf.sweep/1"}, {"rows", out}};
}

std::vector<std::string> BundledScenarioNames() {
  std::vector<std::string> names;
  for (const auto& [name, text] : kBundled) names.push_back(name);
  return names;
}

Json BundledScenario(const std::string& name) {
  for (const auto& [bundled, text] : kBundled) {
    if (name == bundled) return Json::parse(text);
  }
  throw ValidationError("unknown bundled scenario '" + name + "'");
}

Json LoadScenarioJson(const std::string& path, std::string* base_dir) {
  constexpr std::string_view kPrefix = "builtin:";
  if (path.starts_with(kPrefix)) {
    if (base_dir) *base_dir = ".";
    return BundledScenario(path.substr(kPrefix.size()));
  }
  const fs::path dir = fs::path(path).parent_path();
  if (base_dir) *base_dir = dir.empty() ? "." : dir.string();
  return ReadJsonFile(path);
}

ScenarioConfig LoadScenario(const std::string& path) {
  std::string base_dir;
  const Json j = LoadScenarioJson(path, &base_dir);
  return ScenarioConfig::FromJson(j, base_dir);
}

Json Analyze(const PreferenceMatrix& p, const CycleOptions& options) {
  return CycleReportToJson(CycleStats(p, options), p.space());
}

}  // namespace slhf
