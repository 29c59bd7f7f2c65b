// Copyright 2026 The multimatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MULTIMATCH_ERRORS_HPP_
#define MULTIMATCH_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace multimatch {

// Maps to CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Maps to CLI exit code 3. Covers parse, referential and structural
// problems in the input tables, and undefined-sample conditions.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A balance constraint references an unknown covariate or is malformed
// for the covariate's kind.
class spec_error : public std::runtime_error {
 public:
  explicit spec_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Maps to CLI exit code 4: no admissible match under the declared
// constraints.
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace multimatch

#endif  // MULTIMATCH_ERRORS_HPP_
