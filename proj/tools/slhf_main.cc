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

// Command-line front end: solve, sweep, refine and analyze.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "slhf/cycles.h"
#include "slhf/error.h"
#include "slhf/json_io.h"
#include "slhf/scenario.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitSolve = 4;

struct CommonFlags {
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::string format;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Master seed (overrides the config)");
  cmd->add_option("--out-dir", flags.out_dir, "Output directory");
  cmd->add_option("--format", flags.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
}

slhf::ScenarioConfig Load(const std::string& path, const CommonFlags& flags) {
  std::string base_dir;
  slhf::Json j = slhf::LoadScenarioJson(path, &base_dir);
  if (flags.seed) j["seed"] = *flags.seed;
  return slhf::ScenarioConfig::FromJson(j, base_dir);
}

std::string OutDir(const slhf::ScenarioConfig& cfg, const CommonFlags& flags) {
  return flags.out_dir.empty() ? cfg.output_dir : flags.out_dir;
}

void Ensure(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw slhf::SolveError("io", "cannot create '" + dir + "'");
}

std::ofstream Open(const std::string& dir, const std::string& name) {
  Ensure(dir);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw slhf::SolveError("io", "cannot write '" + path + "'");
  out.precision(17);
  return out;
}

int ReportErrors(const slhf::RunReport& report) {
  for (const auto& e : report.errors) {
    std::cerr << "slhf: error: " << e.component << ": " << e.message << "\n";
  }
  return report.failed() ? kExitSolve : 0;
}

void PrintSummary(const slhf::RunReport& report) {
  std::cout << "scenario " << report.scenario << ": "
            << (report.failed() ? "failed" : "ok") << "\n";
  if (!report.game) return;
  const auto& space = report.game->space();
  for (const auto& s : report.solutions) {
    std::cout << "  " << s.id << ":";
    for (int x = 0; x < space.num_contexts(); ++x) {
      if (space.num_contexts() > 1) std::cout << " [" << space.context(x) << "]";
      for (int y = 0; y < space.num_actions(x); ++y) {
        std::cout << " " << space.actions(x)[y] << "=" << s.policy(x, y);
      }
    }
    std::cout << "\n";
  }
}

int Solve(const std::string& path, const CommonFlags& flags) {
  const slhf::ScenarioConfig cfg = Load(path, flags);
  const slhf::RunReport report = slhf::RunScenario(cfg);
  const std::string dir = OutDir(cfg, flags);
  const std::string format = flags.format.empty() ? cfg.format : flags.format;
  slhf::WriteReport(report, dir, format);
  PrintSummary(report);
  std::cout << "wrote " << format << " report to " << dir << "\n";
  return ReportErrors(report);
}

int Refine(const std::string& path, const CommonFlags& flags) {
  const slhf::ScenarioConfig cfg = Load(path, flags);
  if (!cfg.refinement) {
    throw slhf::ValidationError("$.refinement: the config has no refinement block");
  }
  const slhf::RunReport report = slhf::RunScenario(cfg);
  const std::string dir = OutDir(cfg, flags);
  const std::string format = flags.format.empty() ? "csv" : flags.format;
  if (format == "csv") {
    auto out = Open(dir, "refinement.csv");
    slhf::WriteRefinementCsv(report.refinement, out);
  } else {
    Ensure(dir);
    slhf::WriteJsonFile((fs::path(dir) / "refinement.json").string(),
                        report.ToJson()["refinement"]);
  }
  slhf::WriteRefinementCsv(report.refinement, std::cout);
  return ReportErrors(report);
}

int RunSweep(const std::string& path, const std::string& axis_name,
             const std::string& grid, const CommonFlags& flags) {
  const slhf::ScenarioConfig cfg = Load(path, flags);
  const slhf::SweepAxis axis = slhf::ParseSweepAxis(axis_name);
  const auto rows = slhf::Sweep(cfg, axis, slhf::ParseSweepGrid(axis, grid));
  const std::string dir = OutDir(cfg, flags);
  const std::string format = flags.format.empty() ? "csv" : flags.format;
  if (format == "csv") {
    auto out = Open(dir, "sweep.csv");
    slhf::WriteSweepCsv(rows, out);
  } else {
    Ensure(dir);
    slhf::WriteJsonFile((fs::path(dir) / "sweep.json").string(),
                        slhf::SweepToJson(rows));
  }
  slhf::WriteSweepCsv(rows, std::cout);
  int failures = 0;
  for (const auto& row : rows) {
    if (row.status != "ok") {
      std::cerr << "slhf: error: sweep point " << row.index << ": " << row.error
                << "\n";
      ++failures;
    }
  }
  return failures > 0 ? kExitSolve : 0;
}

int RunAnalyze(const std::string& path, const std::string& tie_break,
               int64_t max_cycles, const CommonFlags& flags) {
  const slhf::PreferenceMatrix p =
      slhf::PreferenceMatrixFromJson(slhf::ReadJsonFile(path), path);
  slhf::CycleOptions options;
  options.tie_break = tie_break == "lower-index"
                          ? slhf::TieBreak::kLowerIndexWins
                          : slhf::TieBreak::kReject;
  options.max_cycles = max_cycles;
  const slhf::Json report = slhf::Analyze(p, options);
  const std::string format = flags.format.empty() ? "json" : flags.format;
  if (!flags.out_dir.empty()) {
    if (format == "json") {
      Ensure(flags.out_dir);
      slhf::WriteJsonFile((fs::path(flags.out_dir) / "cycle_report.json").string(),
                          report);
    } else {
      auto out = Open(flags.out_dir, "cycles.csv");
      out << "context,condorcet_winner,cycles\n";
      for (const auto& c : report["contexts"]) {
        out << c["label"].get<std::string>() << ','
            << (c["condorcet_winner"].is_null()
                    ? std::string()
                    : c["condorcet_winner"].get<std::string>())
            << ',' << c["cycles"].get<int64_t>() << '\n';
      }
    }
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular preference-game solver: RLHF, NLHF and SLHF"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config;

  auto* solve = app.add_subcommand("solve", "Run every solver in a scenario");
  solve->add_option("config", config, "Scenario JSON or builtin:NAME")->required();
  AddCommon(solve, flags);

  std::string axis, grid;
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter of a scenario");
  sweep->add_option("config", config, "Scenario JSON or builtin:NAME")->required();
  sweep->add_option("--axis", axis, "alpha, tau, kappa or N")->required();
  sweep->add_option("--grid", grid,
                    "Comma-separated values; alpha points separated by ';'")
      ->required();
  AddCommon(sweep, flags);

  auto* refine = app.add_subcommand("refine", "Refinement hit probabilities");
  refine->add_option("config", config, "Scenario JSON or builtin:NAME")->required();
  AddCommon(refine, flags);

  std::string matrix_path;
  std::string tie_break = "reject";
  int64_t max_cycles = 10'000'000;
  auto* analyze = app.add_subcommand("analyze", "Cycle and Condorcet analysis");
  analyze->add_option("matrix", matrix_path, "Preference matrix JSON")->required();
  analyze->add_option("--tie-break", tie_break, "reject or lower-index")
      ->check(CLI::IsMember({"reject", "lower-index"}));
  analyze->add_option("--max-cycles", max_cycles, "Enumeration cap");
  AddCommon(analyze, flags);

  app.add_subcommand("list", "List bundled scenarios")->callback([] {
    for (const auto& name : slhf::BundledScenarioNames()) {
      std::cout << "builtin:" << name << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve) return Solve(config, flags);
    if (*sweep) return RunSweep(config, axis, grid, flags);
    if (*refine) return Refine(config, flags);
    if (*analyze) return RunAnalyze(matrix_path, tie_break, max_cycles, flags);
    return 0;
  } catch (const slhf::ParseError& e) {
    std::cerr << "slhf: parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const slhf::ValidationError& e) {
    std::cerr << "slhf: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const slhf::SolveError& e) {
    std::cerr << "slhf: error: " << e.what() << "\n";
    return kExitSolve;
  } catch (const std::exception& e) {
    std::cerr << "slhf: error: " << e.what() << "\n";
    return kExitSolve;
  }
}
