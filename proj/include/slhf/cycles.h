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

#ifndef SLHF_CYCLES_H_
#define SLHF_CYCLES_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "slhf/preference.h"

namespace slhf {

enum class TieBreak {
  kReject,           // an off-diagonal 0.5 raises ValidationError
  kLowerIndexWins,   // the lower action index is treated as preferred
};

struct CycleOptions {
  TieBreak tie_break = TieBreak::kReject;
  // Enumeration stops once this many cycles have been counted in total.
  int64_t max_cycles = 10'000'000;
  // Optional per-context subsets of action indices; the tournament is
  // restricted to the induced sub-tournament. Empty means all actions.
  std::vector<std::vector<int>> subsets;
};

struct CycleReport {
  std::vector<std::optional<int>> condorcet_winner;  // per context
  std::vector<int64_t> cycles_per_context;
  int64_t cycle_count = 0;
  std::map<int, int64_t> length_histogram;  // cycle length -> count
  double cyclic_fraction = 0.0;
  bool truncated = false;

  bool operator==(const CycleReport&) const = default;
};

// Directed adjacency of the majority tournament for one context: edge
// j -> i iff P[i][j] > 0.5, i.e. from the non-preferred action towards the
// preferred one. `actions` selects the node set (node k is actions[k]).
std::vector<std::vector<int>> MajorityTournament(const SquareMatrix& p,
                                                 const std::vector<int>& actions,
                                                 TieBreak tie_break);

// Calls `visit(length)` once per elementary cycle of `graph` (Johnson's
// algorithm). Stops after `limit` cycles; returns the number visited and
// whether the limit cut enumeration short.
struct CycleEnumeration {
  int64_t count = 0;
  bool truncated = false;
};
CycleEnumeration EnumerateElementaryCycles(
    const std::vector<std::vector<int>>& graph, int64_t limit,
    const std::function<void(int)>& visit);

CycleReport CycleStats(const PreferenceMatrix& p,
                       const CycleOptions& options = {});

}  // namespace slhf

#endif  // SLHF_CYCLES_H_
