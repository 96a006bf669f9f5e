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

#ifndef SLHF_JSON_IO_H_
#define SLHF_JSON_IO_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "slhf/action_space.h"
#include "slhf/cycles.h"
#include "slhf/policy.h"
#include "slhf/preference.h"

namespace slhf {

using Json = nlohmann::ordered_json;

inline constexpr char kPreferenceMatrixSchema[] = "slhf.preference_matrix/1";
inline constexpr char kPolicySchema[] = "slhf.policy/1";
inline constexpr char kConditionalPolicySchema[] = "slhf.conditional_policy/1";
inline constexpr char kPopulationSchema[] = "slhf.population/1";
inline constexpr char kDatasetSchema[] = "slhf.dataset/1";
inline constexpr char kRewardsSchema[] = "slhf.rewards/1";
inline constexpr char kCycleReportSchema[] = "slhf.cycle_report/1";

// Field access helpers. `where` is a path such as "$.contexts[0]" and is
// used as the ParseError location.
const Json& RequireField(const Json& j, const char* key,
                         const std::string& where);
double ReadNumber(const Json& j, const std::string& where);
int ReadInt(const Json& j, const std::string& where);
std::string ReadString(const Json& j, const std::string& where);
std::vector<double> ReadNumbers(const Json& j, const std::string& where);
std::vector<std::string> ReadStrings(const Json& j, const std::string& where);
// Accepts a missing "schema" field; a different tag is rejected.
void CheckSchema(const Json& j, const char* expected, const std::string& where);

Json ActionSpaceToJson(const ActionSpace& space);
ActionSpace ActionSpaceFromJson(const Json& j, const std::string& where = "$");

Json PreferenceMatrixToJson(const PreferenceMatrix& p);
PreferenceMatrix PreferenceMatrixFromJson(const Json& j,
                                          const std::string& where = "$");

Json PolicyToJson(const Policy& pi, const ActionSpace& space);
// Labels in the file must match `space`.
Policy PolicyFromJson(const Json& j, const ActionSpace& space,
                      const std::string& where = "$");

Json ConditionalPolicyToJson(const ConditionalPolicy& omega,
                             const ActionSpace& space);
ConditionalPolicy ConditionalPolicyFromJson(const Json& j,
                                            const ActionSpace& space,
                                            const std::string& where = "$");

Json PopulationToJson(const AnnotatorPopulation& population);
AnnotatorPopulation PopulationFromJson(const Json& j,
                                       const std::string& where = "$");

Json DatasetToJson(const ComparisonDataset& data);
ComparisonDataset DatasetFromJson(const Json& j,
                                  const std::string& where = "$");

Json RewardTableToJson(const RewardTable& rewards, const ActionSpace& space);
RewardTable RewardTableFromJson(const Json& j, const ActionSpace& space,
                                const std::string& where = "$");

Json CycleReportToJson(const CycleReport& report, const ActionSpace& space);

// Throws ParseError with the path (and byte offset for syntax errors).
Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);

}  // namespace slhf

#endif  // SLHF_JSON_IO_H_
