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

#include "slhf/action_space.h"

#include <cmath>
#include <numeric>
#include <set>

#include "slhf/error.h"

namespace slhf {

ActionSpace::ActionSpace(std::vector<std::string> contexts,
                         std::vector<std::vector<std::string>> actions,
                         std::vector<double> context_dist)
    : contexts_(std::move(contexts)),
      actions_(std::move(actions)),
      rho_(std::move(context_dist)) {
  if (contexts_.empty()) throw ValidationError("ActionSpace: no contexts");
  if (actions_.size() != contexts_.size() || rho_.size() != contexts_.size()) {
    throw ValidationError(
        "ActionSpace: contexts, actions and context_dist differ in length");
  }
  std::set<std::string> seen_contexts(contexts_.begin(), contexts_.end());
  if (seen_contexts.size() != contexts_.size()) {
    throw ValidationError("ActionSpace: duplicate context label");
  }
  double total = 0.0;
  for (size_t x = 0; x < contexts_.size(); ++x) {
    if (!std::isfinite(rho_[x]) || rho_[x] < 0.0) {
      throw ValidationError("ActionSpace: context_dist[" + std::to_string(x) +
                            "] is negative or non-finite");
    }
    total += rho_[x];
    if (actions_[x].size() < 2) {
      throw ValidationError("ActionSpace: context '" + contexts_[x] +
                            "' has fewer than 2 actions");
    }
    std::set<std::string> seen(actions_[x].begin(), actions_[x].end());
    if (seen.size() != actions_[x].size()) {
      throw ValidationError("ActionSpace: duplicate action label in context '" +
                            contexts_[x] + "'");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("ActionSpace: context_dist sums to " +
                          std::to_string(total));
  }
}

ActionSpace ActionSpace::SingleContext(std::vector<std::string> actions) {
  return ActionSpace({"x0"}, {std::move(actions)}, {1.0});
}

ActionSpace ActionSpace::Shared(int num_contexts,
                                std::vector<std::string> actions) {
  if (num_contexts < 1) throw ValidationError("ActionSpace: no contexts");
  std::vector<std::string> labels;
  for (int x = 0; x < num_contexts; ++x) labels.push_back("x" + std::to_string(x));
  std::vector<double> rho(num_contexts, 1.0 / num_contexts);
  return ActionSpace(std::move(labels),
                     std::vector<std::vector<std::string>>(num_contexts, actions),
                     std::move(rho));
}

std::optional<int> ActionSpace::FindContext(std::string_view label) const {
  for (size_t x = 0; x < contexts_.size(); ++x) {
    if (contexts_[x] == label) return static_cast<int>(x);
  }
  return std::nullopt;
}

std::optional<int> ActionSpace::FindAction(int x, std::string_view label) const {
  const auto& list = actions_[x];
  for (size_t y = 0; y < list.size(); ++y) {
    if (list[y] == label) return static_cast<int>(y);
  }
  return std::nullopt;
}

int ActionSpace::ContextIndex(std::string_view label) const {
  if (auto x = FindContext(label)) return *x;
  throw ValidationError("unknown context '" + std::string(label) + "'");
}

int ActionSpace::ActionIndex(int x, std::string_view label) const {
  if (auto y = FindAction(x, label)) return *y;
  throw ValidationError("unknown action '" + std::string(label) +
                        "' in context '" + contexts_[x] + "'");
}

bool ActionSpace::HasUniformSize() const {
  for (const auto& list : actions_) {
    if (list.size() != actions_.front().size()) return false;
  }
  return true;
}

std::vector<std::string> DefaultActionLabels(int n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (i < 26) {
      labels.emplace_back(1, static_cast<char>('A' + i));
    } else {
      labels.push_back("a" + std::to_string(i));
    }
  }
  return labels;
}

}  // namespace slhf
