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

#ifndef MULTIMATCH_BALANCE_HPP_
#define MULTIMATCH_BALANCE_HPP_

#include <string>
#include <vector>

#include "multimatch/csv.hpp"
#include "multimatch/dataset.hpp"
#include "multimatch/ip.hpp"

namespace multimatch {

struct MatchedSample;

enum class ConstraintKind { mean, fine, ks, exact };

// One declarative balance requirement. Semantics by kind:
//   mean:  |mean_t - mean_c| <= tolerance * pooled pre-match SD
//   fine:  per category, |count_t - count_c| <= category_slack
//   ks:    ECDF gap <= max_gap at grid_size equiprobable cut-points
//   exact: no matched pair may cross groups of the keyed covariate
// "stratum" is a valid exact key at cluster level and refers to the
// dedicated stratum column rather than a covariate.
struct BalanceConstraint {
  ConstraintKind kind = ConstraintKind::mean;
  std::string covariate;
  Level level = Level::unit;
  double tolerance = 0.1;              // mean
  int category_slack = 0;              // fine
  double max_gap = 0.1;                // ks
  int grid_size = 10;                  // ks
  bool weight_by_cluster_size = false; // cluster-level mean only

  std::string describe() const;
};

struct BalanceSpec {
  std::vector<BalanceConstraint> unit_constraints;
  std::vector<BalanceConstraint> cluster_constraints;
};

// Rejects constraints whose covariate is unknown at the stated level or
// whose kind does not fit the covariate, with spec_error.
void validate_spec(const BalanceSpec& spec, const Dataset& data);

// Linear constraints over one binary variable per candidate edge.
// Exact-constraint violations both mark the edge excluded and emit a
// b <= 0 row, so either representation alone is sufficient.
struct EdgeConstraintSet {
  std::vector<LinearConstraint> rows;
  std::vector<char> excluded;  // one flag per candidate edge
};

// Edge variables pair treated[e.first] with control[e.second]. Emits the
// degree rows (each unit in at most one pair) plus one row group per
// declared unit-level constraint. Mean and KS right-hand sides scale with
// the number of selected pairs, keeping the rows linear.
EdgeConstraintSet build_unit_constraints(const BalanceSpec& spec, const Dataset& data,
                                         const std::vector<const Unit*>& treated,
                                         const std::vector<const Unit*>& control,
                                         const std::vector<std::pair<int, int>>& edges);

// Same construction one level up: variables pair treated and control
// clusters. weight_by_cluster_size multiplies each cluster's contribution
// to a mean row by its unit count, with the tolerance scaled by the mean
// cluster size of the pair.
EdgeConstraintSet build_cluster_constraints(const BalanceSpec& spec, const Dataset& data,
                                            const std::vector<const Cluster*>& treated,
                                            const std::vector<const Cluster*>& control,
                                            const std::vector<std::pair<int, int>>& edges);

// max over pooled sample points of |ECDF_t(x) - ECDF_c(x)|.
double ks_statistic(const std::vector<double>& treated_values,
                    const std::vector<double>& control_values);

// Half the summed absolute marginal count differences: the number of units
// that would need to change category to equalize the marginals.
double fine_balance_deviation(const std::vector<const Unit*>& matched_treated,
                              const std::vector<const Unit*>& matched_control,
                              const CovariateSchema& covariate, int cov_index);

// Sum over the listed nominal covariates of (1/2) sum_c |prop_t - prop_c|.
double total_variation_distance(const std::vector<const Unit*>& matched_treated,
                                const std::vector<const Unit*>& matched_control,
                                const std::vector<int>& cov_indices,
                                const std::vector<CovariateSchema>& schema);

// One diagnostic row per balance-relevant covariate. Cluster-level rows
// appear twice, unweighted and weighted by cluster size. category is
// empty for scalar rows.
struct BalanceRow {
  std::string covariate;
  Level level = Level::unit;
  std::string category;
  bool weighted = false;
  double mean_treated = 0;
  double mean_control = 0;
  double std_diff = 0;
  double ks = std::numeric_limits<double>::quiet_NaN();
  double fine_deviation = std::numeric_limits<double>::quiet_NaN();
};

// One entry per declared constraint. Mean and KS constraints are checked
// on the aggregate matched sample (implied by per-pair feasibility); fine
// constraints are checked within each matched cluster pair, where they are
// enforced, with the worst pair reported.
struct ConstraintCheck {
  BalanceConstraint constraint;
  double achieved = 0;
  double bound = 0;
  bool violated = false;
};

struct BalanceReport {
  std::vector<BalanceRow> rows;
  std::vector<ConstraintCheck> checks;
  int violations = 0;
  double tv_unit = 0;       // half-normalized, summed over nominal covariates
  double tv_unit_mean = 0;  // per-covariate average of the same
  size_t matched_units = 0;
  size_t matched_cluster_pairs = 0;

  std::string to_text() const;
};

BalanceReport balance_report(const MatchedSample& sample, const Dataset& data,
                             const BalanceSpec& spec);

CsvTable balance_report_csv(const BalanceReport& report);

}  // namespace multimatch

#endif  // MULTIMATCH_BALANCE_HPP_
