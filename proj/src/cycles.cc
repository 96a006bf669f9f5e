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

#include "slhf/cycles.h"

#include <algorithm>
#include <functional>
#include <string>

#include "slhf/error.h"

namespace slhf {
namespace {

// Johnson, "Finding all the elementary circuits of a directed graph" (1975).
// Each cycle is reported from its least vertex, restricted to the strongly
// connected component of that vertex within the subgraph {s, ..., n-1}.
class JohnsonEnumerator {
 public:
  JohnsonEnumerator(const std::vector<std::vector<int>>& graph, int64_t limit,
                    const std::function<void(int)>& visit)
      : graph_(graph),
        n_(static_cast<int>(graph.size())),
        limit_(limit),
        visit_(visit),
        blocked_(n_, false),
        blocked_by_(n_, std::vector<char>(n_, 0)),
        in_component_(n_, false) {}

  CycleEnumeration Run() {
    for (start_ = 0; start_ < n_ && !truncated_; ++start_) {
      ComponentOf(start_);
      for (int v = 0; v < n_; ++v) {
        if (!in_component_[v]) continue;
        blocked_[v] = false;
        std::fill(blocked_by_[v].begin(), blocked_by_[v].end(), 0);
      }
      Circuit(start_);
    }
    return {count_, truncated_};
  }

 private:
  // Marks the strongly connected component of `s` in the subgraph induced by
  // vertices >= s (Tarjan).
  void ComponentOf(int s) {
    std::fill(in_component_.begin(), in_component_.end(), false);
    std::vector<int> index(n_, -1), low(n_, 0);
    std::vector<char> on_stack(n_, 0);
    std::vector<int> stack;
    int counter = 0;
    std::function<void(int)> strong = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      for (int w : graph_[v]) {
        if (w < s) continue;
        if (index[w] < 0) {
          strong(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] == index[v]) {
        std::vector<int> component;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          component.push_back(w);
        } while (w != v);
        if (std::find(component.begin(), component.end(), s) !=
            component.end()) {
          for (int u : component) in_component_[u] = true;
        }
      }
    };
    strong(s);
  }

  void Unblock(int u) {
    blocked_[u] = false;
    for (int w = 0; w < n_; ++w) {
      if (blocked_by_[u][w]) {
        blocked_by_[u][w] = 0;
        if (blocked_[w]) Unblock(w);
      }
    }
  }

  bool Circuit(int v) {
    bool found = false;
    path_length_++;
    blocked_[v] = true;
    for (int w : graph_[v]) {
      if (truncated_) break;
      if (!in_component_[w]) continue;
      if (w == start_) {
        if (count_ >= limit_) {
          truncated_ = true;
          break;
        }
        visit_(path_length_);
        ++count_;
        found = true;
      } else if (!blocked_[w] && Circuit(w)) {
        found = true;
      }
    }
    if (found) {
      Unblock(v);
    } else {
      for (int w : graph_[v]) {
        if (in_component_[w]) blocked_by_[w][v] = 1;
      }
    }
    path_length_--;
    return found;
  }

  const std::vector<std::vector<int>>& graph_;
  const int n_;
  const int64_t limit_;
  const std::function<void(int)>& visit_;
  std::vector<char> blocked_;
  std::vector<std::vector<char>> blocked_by_;
  std::vector<char> in_component_;
  int start_ = 0;
  int path_length_ = 0;
  int64_t count_ = 0;
  bool truncated_ = false;
};

}  // namespace

std::vector<std::vector<int>> MajorityTournament(const SquareMatrix& p,
                                                 const std::vector<int>& actions,
                                                 TieBreak tie_break) {
  const int n = static_cast<int>(actions.size());
  std::vector<std::vector<int>> graph(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const int i = actions[a];
      const int j = actions[b];
      const double v = p(i, j);
      bool i_beats_j = v > 0.5;
      if (v == 0.5) {
        if (tie_break == TieBreak::kReject) {
          throw ValidationError("CycleStats: tie between actions " +
                                std::to_string(i) + " and " + std::to_string(j));
        }
        i_beats_j = i < j;
      }
      if (i_beats_j) graph[b].push_back(a);
    }
  }
  return graph;
}

CycleEnumeration EnumerateElementaryCycles(
    const std::vector<std::vector<int>>& graph, int64_t limit,
    const std::function<void(int)>& visit) {
  return JohnsonEnumerator(graph, limit, visit).Run();
}

CycleReport CycleStats(const PreferenceMatrix& p, const CycleOptions& options) {
  if (!options.subsets.empty() &&
      static_cast<int>(options.subsets.size()) != p.num_contexts()) {
    throw ValidationError("CycleStats: one subset per context required");
  }
  CycleReport report;
  int cyclic_contexts = 0;
  for (int x = 0; x < p.num_contexts(); ++x) {
    std::vector<int> actions;
    if (options.subsets.empty() || options.subsets[x].empty()) {
      for (int y = 0; y < p.num_actions(x); ++y) actions.push_back(y);
    } else {
      actions = options.subsets[x];
      std::vector<int> sorted = actions;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
          sorted.front() < 0 || sorted.back() >= p.num_actions(x)) {
        throw ValidationError("CycleStats: invalid action subset for context " +
                              std::to_string(x));
      }
    }

    const SquareMatrix& m = p.context(x);
    std::optional<int> winner;
    for (int i : actions) {
      bool beats_all = true;
      for (int j : actions) {
        if (j != i && !(m(i, j) > 0.5)) beats_all = false;
      }
      if (beats_all) winner = i;
    }
    report.condorcet_winner.push_back(winner);

    const auto graph = MajorityTournament(m, actions, options.tie_break);
    int64_t context_cycles = 0;
    bool cyclic = false;
    if (!report.truncated) {
      const auto result = EnumerateElementaryCycles(
          graph, options.max_cycles - report.cycle_count,
          [&](int length) { report.length_histogram[length]++; });
      context_cycles = result.count;
      report.truncated = result.truncated;
      cyclic = context_cycles > 0 || result.truncated;
    } else {
      // Past the cap only acyclicity is decided.
      cyclic = EnumerateElementaryCycles(graph, 1, [](int) {}).count > 0;
    }
    report.cycles_per_context.push_back(context_cycles);
    report.cycle_count += context_cycles;
    if (cyclic) cyclic_contexts++;
  }
  report.cyclic_fraction =
      static_cast<double>(cyclic_contexts) / p.num_contexts();
  return report;
}

}  // namespace slhf
