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

#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "multimatch/commands.hpp"
#include "multimatch/config.hpp"
#include "multimatch/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  bool approximate = false;
  long seed = -1;     // -1 = keep config value
  int workers = -1;   // -1 = keep config value
};

// Registers the flags shared by every subcommand.
void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "Study configuration (JSON)")
      ->required();
  cmd->add_option("--out", args->out_override,
                  "Output directory (overrides the config)");
  cmd->add_flag("--approximate", args->approximate,
                "Relax-and-round unit subproblems instead of exact solves");
  cmd->add_option("--seed", args->seed, "Seed override for randomized steps")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", args->workers,
                  "Pair-table threads (0 = all hardware threads)")
      ->check(CLI::NonNegativeNumber);
}

// Loads the config, applies command-line overrides and dispatches. Errors
// map to the documented exit codes: 2 config, 3 data, 4 infeasible.
int dispatch(const CommonArgs& args,
             const std::function<int(const multimatch::StudyConfig&)>& run) {
  multimatch::StudyConfig config;
  try {
    config = multimatch::load_study_config(args.config_path);
  } catch (const multimatch::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  if (!args.out_override.empty()) config.out_dir = args.out_override;
  if (args.approximate) config.matcher.approximate = true;
  if (args.seed >= 0) {
    config.seed = static_cast<unsigned long>(args.seed);
    config.simulate.seed = static_cast<unsigned long>(args.seed);
  }
  if (args.workers >= 0) config.matcher.workers = args.workers;
  return run(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal multilevel matching and randomization inference"};
  app.require_subcommand(1);

  CommonArgs match_args, compare_args, analyze_args, balance_args, sim_args;

  CLI::App* match = app.add_subcommand(
      "match", "Match clusters and units; write the matched sample");
  add_common(match, &match_args);

  CLI::App* compare = app.add_subcommand(
      "compare", "Run dynamic and myopic strategies; write comparison.csv");
  add_common(compare, &compare_args);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Randomization inference on a matched sample");
  add_common(analyze, &analyze_args);

  CLI::App* balance = app.add_subcommand(
      "balance", "Balance tables for a matched sample");
  add_common(balance, &balance_args);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic clustered study");
  add_common(simulate, &sim_args);

  CLI11_PARSE(app, argc, argv);

  if (match->parsed()) return dispatch(match_args, multimatch::cmd_match);
  if (compare->parsed()) return dispatch(compare_args, multimatch::cmd_compare);
  if (analyze->parsed()) return dispatch(analyze_args, multimatch::cmd_analyze);
  if (balance->parsed()) return dispatch(balance_args, multimatch::cmd_balance);
  if (simulate->parsed()) return dispatch(sim_args, multimatch::cmd_simulate);
  return 2;
}
