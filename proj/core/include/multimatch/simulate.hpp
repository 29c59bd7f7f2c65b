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

#ifndef MULTIMATCH_SIMULATE_HPP_
#define MULTIMATCH_SIMULATE_HPP_

#include <vector>

#include "multimatch/csv.hpp"
#include "multimatch/dataset.hpp"

namespace multimatch {

struct SimulateParams {
  int treated_clusters = 5;
  int control_clusters = 5;
  int units_per_cluster = 10;
  int covariate_dims = 2;
  double icc = 0.2;     // share of outcome variance between clusters
  double effect = 0.0;  // additive treatment effect on the outcome
  unsigned long seed = 1;
};

struct SimulatedStudy {
  CsvTable units;     // unit_id,cluster_id,x1..xd,y
  CsvTable clusters;  // cluster_id,treated,w1..wd
  std::vector<CovariateSchema> schema;
};

// Synthetic clustered study: Gaussian cluster and unit covariates, outcome
// with a cluster random effect at the requested intracluster correlation,
// and cluster-level treatment chosen by a logistic score with the treated
// arm size held exact. Deterministic in the seed.
SimulatedStudy simulate_study(const SimulateParams& params);

}  // namespace multimatch

#endif  // MULTIMATCH_SIMULATE_HPP_
