// Copyright 2026 The retmsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RETMSEP_ERRORS_HPP_
#define RETMSEP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace retmsep {

// Caller broke a documented precondition (shape mismatch, bad range, ...).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what)
      : std::invalid_argument(what) {}
};

// Bad or missing external input: files, configs, scenario data.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario parses fine but cannot be realized physically.
class InfeasibleScenario : public InputError {
 public:
  explicit InfeasibleScenario(const std::string& what) : InputError(what) {}
};

// A numerical routine could not produce a usable result.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace retmsep

#endif  // RETMSEP_ERRORS_HPP_
