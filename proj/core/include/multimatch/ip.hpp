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

#ifndef MULTIMATCH_IP_HPP_
#define MULTIMATCH_IP_HPP_

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace multimatch {

enum class Relation { le, eq, ge };

// Sparse linear constraint over binary decision variables. Terms are kept
// sorted by variable index with no duplicates.
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  Relation rel = Relation::le;
  double rhs = 0;
  std::string name;

  double evaluate(const std::vector<double>& x) const;
  bool satisfied(const std::vector<double>& x, double tol = 1e-6) const;
};

// Maximization over binary variables. All variables live in {0,1}; the LP
// relaxation replaces that with [0,1].
struct IntegerProgram {
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;

  void add(LinearConstraint c) { constraints.push_back(std::move(c)); }
  bool feasible_point(const std::vector<double>& x, double tol = 1e-6) const;
};

enum class SolveStatus {
  optimal,              // proven optimum, integral values
  feasible,             // integral incumbent with a positive bound gap
  infeasible,           // proven empty feasible set
  infeasible_unproven,  // limits hit before any incumbent or proof
  fractional            // LP relaxation optimum with fractional values
};

struct Solution {
  SolveStatus status = SolveStatus::infeasible_unproven;
  std::vector<double> values;
  double objective_value = 0;
  double bound_gap = 0;  // upper bound minus objective_value
  long nodes = 0;
  bool timed_out = false;
};

struct SolveOptions {
  double time_limit_seconds = 10.0;
  double gap_tolerance = 0.0;
  long node_limit = 0;  // 0 means unlimited
};

// Optimal basic solution of the [0,1] relaxation via a bounded-variable
// two-phase simplex. Status is optimal when the optimum happens to be
// integral, fractional otherwise, infeasible when no point satisfies the
// constraints.
Solution solve_lp(const IntegerProgram& program);

// Best-first branch and bound over solve_lp, branching on the most
// fractional variable. Returns optimal when the tree is exhausted within
// the limits, feasible (with bound_gap) when an incumbent exists at a
// limit, infeasible_unproven when limits hit first.
Solution solve_ip(const IntegerProgram& program, const SolveOptions& options = {});

// Solves the relaxation, keeps integral coordinates, then rounds the
// fractional ones to 1 in decreasing LP-value order, accepting a rounding
// only when every constraint still holds; remaining fractional variables
// drop to 0. The empty solution is a legitimate outcome. bound_gap is the
// LP optimum minus the rounded objective.
Solution relax_and_round(const IntegerProgram& program);

// Plain-text dump (objective, then one constraint per line) for external
// cross-checking.
void write_lp_format(const IntegerProgram& program, std::ostream& out);

}  // namespace multimatch

#endif  // MULTIMATCH_IP_HPP_
