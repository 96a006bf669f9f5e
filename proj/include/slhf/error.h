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

#ifndef SLHF_ERROR_H_
#define SLHF_ERROR_H_

#include <stdexcept>
#include <string>

namespace slhf {

// Raised when an input violates a type invariant or an operation's
// precondition. `what()` names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& message)
      : std::invalid_argument(message) {}
};

// Malformed JSON / schema violations. `location()` is a JSON-pointer-like
// path to the offending node.
class ParseError : public ValidationError {
 public:
  ParseError(std::string location, const std::string& message)
      : ValidationError(location + ": " + message),
        location_(std::move(location)) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

// An iterative solver failed to produce a usable answer.
class SolveError : public std::runtime_error {
 public:
  SolveError(std::string component, const std::string& message,
             double residual = 0.0)
      : std::runtime_error(component + ": " + message),
        component_(std::move(component)),
        residual_(residual) {}

  const std::string& component() const { return component_; }
  double residual() const { return residual_; }

 private:
  std::string component_;
  double residual_;
};

}  // namespace slhf

#endif  // SLHF_ERROR_H_
