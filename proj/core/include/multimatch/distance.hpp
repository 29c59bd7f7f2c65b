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

#ifndef MULTIMATCH_DISTANCE_HPP_
#define MULTIMATCH_DISTANCE_HPP_

#include <string>
#include <vector>

#include "multimatch/csv.hpp"
#include "multimatch/dataset.hpp"

namespace multimatch {

// Ranks 1..n with ties replaced by the average of the ranks they span.
std::vector<double> average_ranks(const std::vector<double>& values);

// Bipartite distance matrix, treated rows by control columns. Infinite
// entries mark forbidden edges.
struct DistanceMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<double> d;  // row-major

  std::vector<std::string> dropped_covariates;  // fewer than 2 distinct values
  bool ridge_applied = false;  // rank covariance was singular

  size_t rows() const { return row_ids.size(); }
  size_t cols() const { return col_ids.size(); }
  double& at(size_t r, size_t c) { return d[r * col_ids.size() + c]; }
  double at(size_t r, size_t c) const { return d[r * col_ids.size() + c]; }

  CsvTable to_csv() const;
};

// Squared Mahalanobis distance on average ranks: covariates are replaced
// by their ranks over the pooled sample, the rank covariance matrix gets
// its diagonal rescaled to the variance of untied ranks, and the distance
// is the quadratic form under its inverse. Rank-degenerate covariates are
// dropped; a singular covariance falls back to a small diagonal ridge.
DistanceMatrix robust_mahalanobis(const std::vector<const Unit*>& treated,
                                  const std::vector<const Unit*>& control,
                                  const std::vector<int>& cov_indices);

// Same construction over cluster covariates.
DistanceMatrix robust_mahalanobis_clusters(const std::vector<const Cluster*>& treated,
                                           const std::vector<const Cluster*>& control,
                                           const std::vector<int>& cov_indices);

// Fitted treatment probabilities at the chosen level, in canonical order
// (clusters as loaded; units nested within clusters as loaded).
struct PropensityScores {
  std::vector<double> values;
  std::vector<double> coefficients;  // intercept first; dropped columns stay 0
  bool converged = true;
  double sd = 0;  // sample SD of the fitted scores
};

// Logistic model of the cluster-level treatment indicator, fit by
// iteratively reweighted least squares on an intercept plus the listed
// covariates (collinear columns dropped). On non-convergence after 25
// iterations the scores are clamped to [1e-6, 1-1e-6] and flagged.
PropensityScores estimate_propensity(const Dataset& data, Level level,
                                     const std::vector<int>& cov_indices);

// Soft caliper: entries whose score gap exceeds width * score_sd gain an
// additive penalty of 1000 * (excess / score_sd). Entries never decrease
// and no edge becomes forbidden.
DistanceMatrix apply_caliper(DistanceMatrix matrix, const std::vector<double>& row_scores,
                             const std::vector<double>& col_scores, double width,
                             double score_sd);

}  // namespace multimatch

#endif  // MULTIMATCH_DISTANCE_HPP_
