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

#ifndef SLHF_ACTION_SPACE_H_
#define SLHF_ACTION_SPACE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slhf {

// Finite contexts, each with its own ordered action list, and a known
// context distribution rho. Immutable after construction.
class ActionSpace {
 public:
  ActionSpace() = default;

  // Throws ValidationError unless rho is a probability vector (1e-12), each
  // context has >= 2 distinct action labels, and context labels are distinct.
  ActionSpace(std::vector<std::string> contexts,
              std::vector<std::vector<std::string>> actions,
              std::vector<double> context_dist);

  // One context labelled "x0" with probability 1.
  static ActionSpace SingleContext(std::vector<std::string> actions);

  // `num_contexts` contexts "x0", "x1", ... sharing one action list, uniform
  // rho.
  static ActionSpace Shared(int num_contexts, std::vector<std::string> actions);

  int num_contexts() const { return static_cast<int>(contexts_.size()); }
  int num_actions(int x) const {
    return static_cast<int>(actions_[x].size());
  }
  const std::string& context(int x) const { return contexts_[x]; }
  const std::vector<std::string>& contexts() const { return contexts_; }
  const std::vector<std::string>& actions(int x) const { return actions_[x]; }
  const std::vector<double>& context_dist() const { return rho_; }
  double context_prob(int x) const { return rho_[x]; }

  std::optional<int> FindContext(std::string_view label) const;
  std::optional<int> FindAction(int x, std::string_view label) const;
  // Throw ValidationError when the label is unknown.
  int ContextIndex(std::string_view label) const;
  int ActionIndex(int x, std::string_view label) const;

  // True when every context has the same number of actions.
  bool HasUniformSize() const;

  bool operator==(const ActionSpace&) const = default;

 private:
  std::vector<std::string> contexts_;
  std::vector<std::vector<std::string>> actions_;
  std::vector<double> rho_;
};

// Default action labels "A", "B", ..., "Z", then "a26", "a27", ...
std::vector<std::string> DefaultActionLabels(int n);

}  // namespace slhf

#endif  // SLHF_ACTION_SPACE_H_
