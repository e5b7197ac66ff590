//
// Copyright 2026 The ShuffleDP Authors.
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
//

#ifndef SHUFFLEDP_ERRORS_H_
#define SHUFFLEDP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace shuffledp {

// Argument outside the mathematical domain of an operation (non-finite
// input, d < 2 for a shuffled bound, p outside (0, 1], ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Tensor shapes that cannot be combined.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what)
      : std::invalid_argument(what) {}
};

// No noise level up to the search ceiling meets the requested budget.
class InfeasibleBudgetError : public std::runtime_error {
 public:
  explicit InfeasibleBudgetError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed or unreadable configuration / data input.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shuffledp

#endif  // SHUFFLEDP_ERRORS_H_
