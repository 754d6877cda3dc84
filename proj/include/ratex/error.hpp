// Copyright 2026 The ratex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RATEX_ERROR_HPP_
#define RATEX_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ratex {

// Caller broke an operation's precondition (shape mismatch, bad index, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but the operation is undefined on it, e.g. pooling
// over an empty mask.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite values showed up where finite ones are required.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ratex

#endif  // RATEX_ERROR_HPP_
