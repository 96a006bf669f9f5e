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

#include "slhf/json_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "slhf/error.h"

namespace slhf {
namespace {

std::string At(const std::string& where, const char* key) {
  return where + "." + key;
}

std::string At(const std::string& where, size_t index) {
  return where + "[" + std::to_string(index) + "]";
}

const Json& RequireArray(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array");
  return j;
}

// Wraps a construction failure of a parsed object so it carries a location.
template <typename F>
auto Construct(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(where, e.what());
  }
}

void CheckLabels(const Json& context, const ActionSpace& space, int x,
                 const std::string& where) {
  const std::string label = ReadString(RequireField(context, "label", where),
                                       At(where, "label"));
  if (label != space.context(x)) {
    throw ParseError(At(where, "label"), "expected context '" +
                                             space.context(x) + "', found '" +
                                             label + "'");
  }
  if (context.contains("actions")) {
    const auto actions =
        ReadStrings(context.at("actions"), At(where, "actions"));
    if (actions != space.actions(x)) {
      throw ParseError(At(where, "actions"),
                       "action labels differ from the game");
    }
  }
}

const Json& ContextList(const Json& j, const ActionSpace& space,
                        const std::string& where) {
  const Json& contexts =
      RequireArray(RequireField(j, "contexts", where), At(where, "contexts"));
  if (static_cast<int>(contexts.size()) != space.num_contexts()) {
    throw ParseError(At(where, "contexts"),
                     "expected " + std::to_string(space.num_contexts()) +
                         " contexts, found " + std::to_string(contexts.size()));
  }
  return contexts;
}

}  // namespace

const Json& RequireField(const Json& j, const char* key,
                         const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(where, std::string("missing field '") + key + "'");
  }
  return *it;
}

double ReadNumber(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where, "expected a finite number");
  return v;
}

int ReadInt(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where, "expected an integer");
  return j.get<int>();
}

std::string ReadString(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> ReadNumbers(const Json& j, const std::string& where) {
  RequireArray(j, where);
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(ReadNumber(j[i], At(where, i)));
  return out;
}

std::vector<std::string> ReadStrings(const Json& j, const std::string& where) {
  RequireArray(j, where);
  std::vector<std::string> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(ReadString(j[i], At(where, i)));
  return out;
}

void CheckSchema(const Json& j, const char* expected, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  auto it = j.find("schema");
  if (it == j.end()) return;
  const std::string tag = ReadString(*it, At(where, "schema"));
  if (tag != expected) {
    throw ParseError(At(where, "schema"), "expected schema '" +
                                              std::string(expected) +
                                              "', found '" + tag + "'");
  }
}

Json ActionSpaceToJson(const ActionSpace& space) {
  Json contexts = Json::array();
  for (int x = 0; x < space.num_contexts(); ++x) {
    contexts.push_back({{"label", space.context(x)},
                        {"prob", space.context_prob(x)},
                        {"actions", space.actions(x)}});
  }
  return {{"contexts", contexts}};
}

ActionSpace ActionSpaceFromJson(const Json& j, const std::string& where) {
  const Json& contexts =
      RequireArray(RequireField(j, "contexts", where), At(where, "contexts"));
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> actions;
  std::vector<double> rho;
  for (size_t x = 0; x < contexts.size(); ++x) {
    const std::string cw = At(At(where, "contexts"), x);
    const Json& c = contexts[x];
    labels.push_back(
        c.contains("label") ? ReadString(c.at("label"), At(cw, "label"))
                            : "x" + std::to_string(x));
    actions.push_back(
        ReadStrings(RequireField(c, "actions", cw), At(cw, "actions")));
    rho.push_back(c.contains("prob") ? ReadNumber(c.at("prob"), At(cw, "prob"))
                                     : 1.0 / contexts.size());
  }
  return Construct(where, [&] {
    return ActionSpace(std::move(labels), std::move(actions), std::move(rho));
  });
}

Json PreferenceMatrixToJson(const PreferenceMatrix& p) {
  Json j = ActionSpaceToJson(p.space());
  for (int x = 0; x < p.num_contexts(); ++x) {
    Json rows = Json::array();
    const SquareMatrix& m = p.context(x);
    for (int i = 0; i < m.size(); ++i) {
      Json row = Json::array();
      for (int k = 0; k < m.size(); ++k) row.push_back(m(i, k));
      rows.push_back(row);
    }
    j["contexts"][x]["matrix"] = rows;
  }
  Json out = {{"schema", kPreferenceMatrixSchema}};
  out["contexts"] = j["contexts"];
  return out;
}

PreferenceMatrix PreferenceMatrixFromJson(const Json& j,
                                          const std::string& where) {
  CheckSchema(j, kPreferenceMatrixSchema, where);
  const ActionSpace space = ActionSpaceFromJson(j, where);
  const Json& contexts = j.at("contexts");
  std::vector<SquareMatrix> matrices;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const std::string cw = At(At(where, "contexts"), x);
    const std::string mw = At(cw, "matrix");
    const Json& rows = RequireArray(RequireField(contexts[x], "matrix", cw), mw);
    const int n = space.num_actions(x);
    if (static_cast<int>(rows.size()) != n) {
      throw ParseError(mw, "expected " + std::to_string(n) + " rows");
    }
    SquareMatrix m(n);
    for (int i = 0; i < n; ++i) {
      const auto row = ReadNumbers(rows[i], At(mw, i));
      if (static_cast<int>(row.size()) != n) {
        throw ParseError(At(mw, i), "expected " + std::to_string(n) + " entries");
      }
      for (int k = 0; k < n; ++k) m(i, k) = row[k];
    }
    matrices.push_back(std::move(m));
  }
  return Construct(where,
                   [&] { return PreferenceMatrix(space, std::move(matrices)); });
}

Json PolicyToJson(const Policy& pi, const ActionSpace& space) {
  pi.CheckShape(space);
  Json contexts = Json::array();
  for (int x = 0; x < space.num_contexts(); ++x) {
    contexts.push_back({{"label", space.context(x)},
                        {"actions", space.actions(x)},
                        {"probs", pi.table()[x]}});
  }
  return {{"schema", kPolicySchema}, {"contexts", contexts}};
}

Policy PolicyFromJson(const Json& j, const ActionSpace& space,
                      const std::string& where) {
  CheckSchema(j, kPolicySchema, where);
  const Json& contexts = ContextList(j, space, where);
  LeaderTable table;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const std::string cw = At(At(where, "contexts"), x);
    CheckLabels(contexts[x], space, x, cw);
    table.push_back(
        ReadNumbers(RequireField(contexts[x], "probs", cw), At(cw, "probs")));
  }
  return Construct(where, [&] {
    Policy pi(std::move(table));
    pi.CheckShape(space);
    return pi;
  });
}

Json ConditionalPolicyToJson(const ConditionalPolicy& omega,
                             const ActionSpace& space) {
  omega.CheckShape(space);
  Json contexts = Json::array();
  for (int x = 0; x < space.num_contexts(); ++x) {
    contexts.push_back({{"label", space.context(x)},
                        {"actions", space.actions(x)},
                        {"rows", omega.table()[x]}});
  }
  return {{"schema", kConditionalPolicySchema}, {"contexts", contexts}};
}

ConditionalPolicy ConditionalPolicyFromJson(const Json& j,
                                            const ActionSpace& space,
                                            const std::string& where) {
  CheckSchema(j, kConditionalPolicySchema, where);
  const Json& contexts = ContextList(j, space, where);
  FollowerTable table;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const std::string cw = At(At(where, "contexts"), x);
    CheckLabels(contexts[x], space, x, cw);
    const std::string rw = At(cw, "rows");
    const Json& rows = RequireArray(RequireField(contexts[x], "rows", cw), rw);
    auto& out = table.emplace_back();
    for (size_t y = 0; y < rows.size(); ++y) {
      out.push_back(ReadNumbers(rows[y], At(rw, y)));
    }
  }
  return Construct(where, [&] {
    ConditionalPolicy omega(std::move(table));
    omega.CheckShape(space);
    return omega;
  });
}

Json PopulationToJson(const AnnotatorPopulation& population) {
  return {{"schema", kPopulationSchema},
          {"rankings", population.rankings()},
          {"weights", population.weights()}};
}

AnnotatorPopulation PopulationFromJson(const Json& j, const std::string& where) {
  CheckSchema(j, kPopulationSchema, where);
  const std::string rw = At(where, "rankings");
  const Json& rankings = RequireArray(RequireField(j, "rankings", where), rw);
  std::vector<std::vector<std::string>> parsed;
  for (size_t k = 0; k < rankings.size(); ++k) {
    parsed.push_back(ReadStrings(rankings[k], At(rw, k)));
  }
  auto weights =
      ReadNumbers(RequireField(j, "weights", where), At(where, "weights"));
  return Construct(where, [&] {
    return AnnotatorPopulation(std::move(parsed), std::move(weights));
  });
}

Json DatasetToJson(const ComparisonDataset& data) {
  Json records = Json::array();
  for (const Comparison& c : data.records()) {
    records.push_back({{"context", c.context},
                       {"chosen", c.chosen},
                       {"rejected", c.rejected}});
  }
  return {{"schema", kDatasetSchema}, {"records", records}};
}

ComparisonDataset DatasetFromJson(const Json& j, const std::string& where) {
  CheckSchema(j, kDatasetSchema, where);
  const std::string rw = At(where, "records");
  const Json& records = RequireArray(RequireField(j, "records", where), rw);
  std::vector<Comparison> parsed;
  for (size_t i = 0; i < records.size(); ++i) {
    const std::string w = At(rw, i);
    const Json& r = records[i];
    Comparison c;
    c.context = r.contains("context")
                    ? ReadString(r.at("context"), At(w, "context"))
                    : "x0";
    c.chosen = ReadString(RequireField(r, "chosen", w), At(w, "chosen"));
    c.rejected = ReadString(RequireField(r, "rejected", w), At(w, "rejected"));
    int repeat = 1;
    if (r.contains("count")) {
      repeat = ReadInt(r.at("count"), At(w, "count"));
      if (repeat < 1) throw ParseError(At(w, "count"), "count must be >= 1");
    }
    for (int k = 0; k < repeat; ++k) parsed.push_back(c);
  }
  return Construct(where,
                   [&] { return ComparisonDataset(std::move(parsed)); });
}

Json RewardTableToJson(const RewardTable& rewards, const ActionSpace& space) {
  rewards.CheckShape(space);
  Json contexts = Json::array();
  for (int x = 0; x < space.num_contexts(); ++x) {
    contexts.push_back({{"label", space.context(x)},
                        {"actions", space.actions(x)},
                        {"rewards", rewards.values()[x]}});
  }
  return {{"schema", kRewardsSchema}, {"contexts", contexts}};
}

RewardTable RewardTableFromJson(const Json& j, const ActionSpace& space,
                                const std::string& where) {
  CheckSchema(j, kRewardsSchema, where);
  const Json& contexts = ContextList(j, space, where);
  std::vector<std::vector<double>> values;
  for (int x = 0; x < space.num_contexts(); ++x) {
    const std::string cw = At(At(where, "contexts"), x);
    CheckLabels(contexts[x], space, x, cw);
    values.push_back(ReadNumbers(RequireField(contexts[x], "rewards", cw),
                                 At(cw, "rewards")));
  }
  return Construct(where, [&] {
    RewardTable r(std::move(values));
    r.CheckShape(space);
    return r;
  });
}

Json CycleReportToJson(const CycleReport& report, const ActionSpace& space) {
  Json contexts = Json::array();
  for (int x = 0; x < space.num_contexts(); ++x) {
    Json c = {{"label", space.context(x)}};
    const auto& winner = report.condorcet_winner[x];
    c["condorcet_winner"] =
        winner ? Json(space.actions(x)[*winner]) : Json(nullptr);
    c["cycles"] = report.cycles_per_context[x];
    contexts.push_back(c);
  }
  Json histogram = Json::object();
  for (const auto& [length, count] : report.length_histogram) {
    histogram[std::to_string(length)] = count;
  }
  return {{"schema", kCycleReportSchema},
          {"contexts", contexts},
          {"cycle_count", report.cycle_count},
          {"length_histogram", histogram},
          {"cyclic_fraction", report.cyclic_fraction},
          {"truncated", report.truncated}};
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ":byte " + std::to_string(e.byte), e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw SolveError("io", "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw SolveError("io", "failed writing '" + path + "'");
}

}  // namespace slhf
