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

#ifndef MULTIMATCH_DATASET_HPP_
#define MULTIMATCH_DATASET_HPP_

#include <limits>
#include <string>
#include <vector>

namespace multimatch {

enum class Kind { continuous, nominal, binary };
enum class Level { unit, cluster };
enum class Role { balance, distance_only, outcome, ignore };
enum class MissingPolicy { mean_impute_with_indicator, error };

// One covariate column of the units or clusters table.
struct CovariateSchema {
  std::string name;
  Kind kind = Kind::continuous;
  Level level = Level::unit;
  Role role = Role::balance;
  std::vector<std::string> categories;  // nominal only, non-empty
  MissingPolicy missing = MissingPolicy::error;
  bool derived = false;  // auto-appended missingness indicator
};

// An individual inside a cluster. Covariate values are stored as doubles;
// nominal covariates hold the 0-based category index. Imputed cells are
// flagged so the original table can be reconstructed.
struct Unit {
  std::string unit_id;
  std::string cluster_id;
  std::vector<double> covariates;  // aligned to Dataset::unit_schema
  std::vector<bool> imputed;
  double outcome = std::numeric_limits<double>::quiet_NaN();
  bool has_outcome = false;
};

// The group level at which treatment is assigned.
struct Cluster {
  std::string cluster_id;
  bool treated = false;
  std::vector<double> covariates;  // aligned to Dataset::cluster_schema
  std::vector<bool> imputed;
  std::string stratum;
  bool has_stratum = false;
  std::vector<Unit> units;
};

// Validated two-level sample. Pooled standard deviations are computed once
// on the full pre-match sample and never recomputed after matching, so a
// tolerance of "0.1 SD" means the same thing for every candidate match.
struct Dataset {
  std::vector<CovariateSchema> unit_schema;
  std::vector<CovariateSchema> cluster_schema;
  std::vector<Cluster> clusters;

  std::vector<double> unit_pooled_sd;     // NaN for nominal entries
  std::vector<double> cluster_pooled_sd;  // NaN for nominal entries
  std::vector<bool> unit_degenerate;      // zero variance in both groups
  std::vector<bool> cluster_degenerate;

  int unit_cov_index(const std::string& name) const;
  int cluster_cov_index(const std::string& name) const;
  int outcome_index() const;  // -1 when no covariate has role outcome

  std::vector<const Cluster*> treated_clusters() const;
  std::vector<const Cluster*> control_clusters() const;
  std::vector<const Unit*> units_of(bool treated) const;
  const Cluster* find_cluster(const std::string& id) const;
  const Unit* find_unit(const std::string& id) const;
  size_t n_units() const;
};

// Parses and validates the two CSVs against the schema. Missing cells
// (literal "NA") are mean-imputed on the full sample with an indicator
// covariate appended, or rejected, per each covariate's missing policy.
Dataset load_dataset(const std::string& units_path, const std::string& clusters_path,
                     std::vector<CovariateSchema> schema);

// Inverse of load_dataset on validated data: writes the original table
// form, with "NA" restored in imputed cells and derived indicator
// covariates omitted.
void save_dataset(const Dataset& data, const std::string& units_path,
                  const std::string& clusters_path);

// sqrt((s_t^2 + s_c^2) / 2) over the full pre-match sample, where s_t and
// s_c are the sample SDs of the treated and control groups at the given
// level. Zero variance in both groups yields 0 (degenerate covariate).
double pooled_std(const Dataset& data, Level level, const std::string& covariate);

// (mean treated - mean control) / pooled, over the supplied units only.
// Degenerate path (pooled <= 0): 0 when the means agree, +/-inf otherwise.
double standardized_difference(const std::vector<const Unit*>& treated,
                               const std::vector<const Unit*>& control, int cov_index,
                               double pooled);

double mean_of(const std::vector<const Unit*>& units, int cov_index);

}  // namespace multimatch

#endif  // MULTIMATCH_DATASET_HPP_
