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

#ifndef SLHF_SCENARIO_H_
#define SLHF_SCENARIO_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slhf/bradley_terry.h"
#include "slhf/json_io.h"
#include "slhf/nash.h"
#include "slhf/objective.h"
#include "slhf/refinement.h"
#include "slhf/stackelberg.h"

namespace slhf {

inline constexpr char kScenarioSchema[] = "slhf.scenario/1";
inline constexpr char kReportSchema[] = "slhf.report/1";

struct RlhfSpec {
  double tau = 0.01;
  BtFitOptions fit;
  ComparisonDataset dataset;
};

struct EnumerateSpec {
  // An indifferent leader mixes uniformly over its tie set; otherwise the
  // lowest-index action is played.
  bool uniform_over_ties = true;
};

struct TargetEntry {
  std::string name;
  std::vector<std::vector<std::string>> sets;  // per context, labels
  std::optional<Json> rewards;                 // top-reward actions instead
};

struct RefinementSpec {
  std::vector<TargetEntry> targets;
  std::vector<int> n_values;
  int trials = 0;  // 0: analytic only
  std::optional<uint64_t> seed;
};

// A parsed and validated scenario. `source` keeps the resolved JSON (files
// inlined, seeds filled in) and is what reports echo.
struct ScenarioConfig {
  std::string name;
  std::optional<uint64_t> seed;
  Json game;
  Json references;  // "uniform" or {"leader": ..., "follower": ...}
  std::optional<RlhfSpec> rlhf;
  std::optional<NashOptions> nlhf;
  std::optional<Regularization> slhf_exact;
  std::optional<EnumerateSpec> slhf_enumerate;
  std::optional<GdaConfig> slhf_gda;
  std::optional<StochasticGdaConfig> slhf_gda_stochastic;
  std::optional<RefinementSpec> refinement;
  std::string output_dir = "out";
  std::string format = "json";
  Json source;

  // Throws ParseError/ValidationError. Relative file references resolve
  // against `base_dir`.
  static ScenarioConfig FromJson(const Json& j, const std::string& base_dir = ".");
  Json ToJson() const { return source; }
};

// Path on disk, or "builtin:NAME" for a bundled scenario. `base_dir`
// receives the directory relative file references resolve against.
Json LoadScenarioJson(const std::string& path, std::string* base_dir);
ScenarioConfig LoadScenario(const std::string& path);
std::vector<std::string> BundledScenarioNames();
// Throws ValidationError for an unknown name.
Json BundledScenario(const std::string& name);

struct SolutionEntry {
  std::string id;
  std::string solver;
  Policy policy;
  std::optional<ConditionalPolicy> follower;
  Json diagnostics = Json::object();

  bool operator==(const SolutionEntry&) const = default;
};

struct ComponentError {
  std::string component;
  std::string message;

  bool operator==(const ComponentError&) const = default;
};

struct RunReport {
  std::string scenario;
  Json config;
  std::optional<PreferenceMatrix> game;
  std::vector<SolutionEntry> solutions;
  std::vector<std::string> comparison_ids;
  std::vector<std::vector<double>> comparison;  // row beats column
  std::vector<RefinementRow> refinement;
  std::vector<ComponentError> errors;
  Json timing = Json::object();  // seconds per component
  // Iterate histories of GDA runs, exported as CSV beside the report.
  std::map<std::string, std::vector<TraceRow>> traces;

  bool failed() const { return !errors.empty(); }

  Json ToJson() const;
  // Re-validates every policy. Traces are not part of the JSON payload.
  static RunReport FromJson(const Json& j);
  // Compares everything except timing and traces.
  bool SamePayload(const RunReport& other) const;
};

RunReport RunScenario(const ScenarioConfig& config);

// Writes report.json (format "json") or solutions.csv, comparison.csv and
// refinement.csv (format "csv"), plus one trace CSV per GDA run.
void WriteReport(const RunReport& report, const std::string& dir,
                 const std::string& format);

enum class SweepAxis { kAlpha, kTau, kKappa, kN };

SweepAxis ParseSweepAxis(const std::string& name);
// alpha: "a1,a2,a3;a1,a2,a3;..."; other axes: comma-separated numbers.
std::vector<std::vector<double>> ParseSweepGrid(SweepAxis axis,
                                                const std::string& grid);

struct SweepRow {
  int index = 0;
  std::string axis;
  std::string value;
  std::string status;  // "ok" or "failed"
  std::map<std::string, std::string> metrics;
  std::string error;
};

// Column order of the sweep CSV.
const std::vector<std::string>& SweepColumns();

std::vector<SweepRow> Sweep(const ScenarioConfig& base, SweepAxis axis,
                            const std::vector<std::vector<double>>& grid);
void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out);
Json SweepToJson(const std::vector<SweepRow>& rows);

// Cycle and Condorcet analysis of a preference-matrix file.
Json Analyze(const PreferenceMatrix& p, const CycleOptions& options = {});

}  // namespace slhf

#endif  // SLHF_SCENARIO_H_
