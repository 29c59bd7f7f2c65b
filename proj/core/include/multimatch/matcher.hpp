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

#ifndef MULTIMATCH_MATCHER_HPP_
#define MULTIMATCH_MATCHER_HPP_

#include <string>
#include <utility>
#include <vector>

#include "multimatch/balance.hpp"
#include "multimatch/dataset.hpp"
#include "multimatch/distance.hpp"
#include "multimatch/ip.hpp"
#include "multimatch/sample.hpp"

namespace multimatch {

enum class MatchObjective { max_cardinality, min_distance };

struct DistanceConfig {
  // Unit covariates entering the distance; empty means every numeric
  // unit covariate with role balance or distance_only.
  std::vector<std::string> covariates;
  double caliper_width = 0;  // in SDs of the propensity score; 0 disables
  // Covariates of the propensity model; empty means same as `covariates`.
  std::vector<std::string> propensity_covariates;
};

struct MatcherOptions {
  MatchObjective objective = MatchObjective::max_cardinality;
  double lambda = 0;          // reward per matched cluster pair
  bool approximate = false;   // relax-and-round instead of exact per-pair solves
  double time_limit_seconds = 10;  // per subproblem
  int workers = 0;            // pair-table threads; 0 = hardware concurrency
};

// One per-cluster-pair unit matching. Indices refer to the treated and
// control unit lists handed to the solve.
struct UnitMatchResult {
  int m = 0;
  std::vector<std::pair<int, int>> pairing;
  double total_distance = 0;
  bool below_optimal = false;  // limits hit, optimality unproven
};

// Largest balanced unit matching, with total distance minimized among the
// maximum-cardinality solutions (two sequential solves). approximate
// replaces the first solve by relax-and-round and skips the tie-break.
UnitMatchResult cardinality_match_units(const std::vector<const Unit*>& treated,
                                        const std::vector<const Unit*>& control,
                                        const BalanceSpec& spec, const Dataset& data,
                                        const DistanceMatrix& distances,
                                        const SolveOptions& options, bool approximate);

// Minimum-total-distance unit matching of exactly `required` pairs subject
// to the unit constraints; m = 0 when that count is unattainable.
UnitMatchResult min_distance_match_units(const std::vector<const Unit*>& treated,
                                         const std::vector<const Unit*>& control,
                                         const BalanceSpec& spec, const Dataset& data,
                                         const DistanceMatrix& distances, int required,
                                         const SolveOptions& options);

// The Kt x Kc table of per-cluster-pair unit matchings. Entries for
// cluster pairs ruled out by an exact cluster constraint are never solved.
struct PairTable {
  size_t kt = 0, kc = 0;
  std::vector<int> m;
  std::vector<double> dist;
  std::vector<std::vector<std::pair<int, int>>> pairing;  // unit indices per pair
  std::vector<char> below_optimal;
  std::vector<char> skipped;
  long solved_subproblems = 0;

  size_t idx(size_t t, size_t c) const { return t * kc + c; }
};

PairTable compute_pair_table(const Dataset& data, const BalanceSpec& spec,
                             const DistanceConfig& dconfig, const MatcherOptions& options);

// Cluster assignment over the pair table: maximize sum(m a) + lambda
// sum(a) subject to the cluster constraints, then minimize sum(dist a)
// with the first objective pinned. Pairs with m = 0 are selectable only
// when lambda > 0 and never when they were skipped.
struct ClusterMatchResult {
  std::vector<std::pair<int, int>> assignment;  // (treated index, control index)
  double total_m = 0;
  double total_distance = 0;
  bool below_optimal = false;
  // When the assignment comes out empty, one line per candidate pair
  // naming the constraint rows that reject it on its own.
  std::vector<std::string> infeasibility;
};

ClusterMatchResult cluster_match(const PairTable& table, const BalanceSpec& spec,
                                 const Dataset& data, double lambda,
                                 MatchObjective objective, const SolveOptions& options);

// A match run with its bookkeeping for reports.
struct MatchRun {
  MatchedSample sample;
  long subproblems_solved = 0;
  double pair_table_seconds = 0;
  double cluster_stage_seconds = 0;
  std::vector<std::string> infeasibility;
};

// Unit matchings across every admissible cluster pair first, then the
// cluster assignment over the resulting table (backward order).
MatchRun multilevel_match(const Dataset& data, const BalanceSpec& spec,
                          const DistanceConfig& dconfig, const MatcherOptions& options);

enum class MyopicMode { optimal, cardinality };

// Cluster-first baseline. optimal: minimum-distance cluster assignment on
// cluster covariates with propensity calipers, then full minimum-distance
// unit pairing inside each chosen pair, ignoring balance. cardinality:
// maximum cluster pairs under the cluster constraints, then
// cardinality_match_units inside each chosen pair.
MatchRun myopic_match(const Dataset& data, const BalanceSpec& spec,
                      const DistanceConfig& dconfig, const MatcherOptions& options,
                      MyopicMode mode);

struct AssignmentResult {
  std::vector<std::pair<int, int>> pairs;  // (row, col)
  double total_cost = 0;
  std::vector<int> unmatched_rows;  // rows with no finite edge left
};

// Minimum-cost assignment of the smaller side by shortest augmenting
// paths; infinite entries are unusable edges. Optimal, not heuristic.
AssignmentResult min_distance_assignment(const DistanceMatrix& distances);

}  // namespace multimatch

#endif  // MULTIMATCH_MATCHER_HPP_
