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

#ifndef MULTIMATCH_COMMANDS_HPP_
#define MULTIMATCH_COMMANDS_HPP_

#include "multimatch/config.hpp"

namespace multimatch {

// Exit codes shared by all commands: 0 success, 2 configuration problem,
// 3 data problem, 4 infeasible constraint system. Diagnostics go to
// stderr; outputs are written into config.out_dir.

// Writes cluster_pairs.csv, unit_pairs.csv, balance_report.csv and
// run_summary.json for the dynamic strategy.
int cmd_match(const StudyConfig& config);

// Runs dynamic, myopic-cardinality and myopic-optimal matching under one
// configuration and writes comparison.csv (one row per method).
int cmd_compare(const StudyConfig& config);

// Reads the matched sample from config.out_dir and writes
// inference_report.json, inference_report.txt and gamma_sweep.csv.
int cmd_analyze(const StudyConfig& config);

// Reads the matched sample and writes unit_mean_balance.csv,
// unit_fine_balance.csv, cluster_mean_balance.csv and
// sample_description.csv.
int cmd_balance(const StudyConfig& config);

// Writes synthetic units.csv and clusters.csv from config.simulate.
int cmd_simulate(const StudyConfig& config);

}  // namespace multimatch

#endif  // MULTIMATCH_COMMANDS_HPP_
