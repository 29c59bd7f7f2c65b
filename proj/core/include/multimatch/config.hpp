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

#ifndef MULTIMATCH_CONFIG_HPP_
#define MULTIMATCH_CONFIG_HPP_

#include <string>
#include <vector>

#include "multimatch/balance.hpp"
#include "multimatch/dataset.hpp"
#include "multimatch/inference.hpp"
#include "multimatch/matcher.hpp"
#include "multimatch/simulate.hpp"

namespace multimatch {

// One JSON document drives every command. Unknown keys are rejected so a
// typo cannot silently weaken a constraint.
struct StudyConfig {
  std::string units_path;
  std::string clusters_path;
  std::string out_dir = "out";
  std::vector<CovariateSchema> schema;
  BalanceSpec balance;
  DistanceConfig distance;
  MatcherOptions matcher;
  InferenceOptions inference;
  SimulateParams simulate;
  unsigned long seed = 1;
};

// Parses the document, rejecting unknown keys and out-of-range values with
// a config_error naming the offending key. origin labels error messages.
StudyConfig parse_study_config(const std::string& json_text, const std::string& origin);

StudyConfig load_study_config(const std::string& path);

}  // namespace multimatch

#endif  // MULTIMATCH_CONFIG_HPP_
