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

#ifndef MULTIMATCH_BENCHMARKS_BENCH_UTIL_HPP_
#define MULTIMATCH_BENCHMARKS_BENCH_UTIL_HPP_

#include <filesystem>
#include <string>

#include "multimatch/balance.hpp"
#include "multimatch/csv.hpp"
#include "multimatch/dataset.hpp"
#include "multimatch/simulate.hpp"

namespace multimatch::bench {

// Simulated two-level study round-tripped through the CSV loader, so the
// benchmarks exercise the same validated representation the CLI sees.
inline Dataset make_study(int treated_clusters, int control_clusters, int units_per_cluster,
                          unsigned long seed) {
  SimulateParams params;
  params.treated_clusters = treated_clusters;
  params.control_clusters = control_clusters;
  params.units_per_cluster = units_per_cluster;
  params.covariate_dims = 2;
  params.icc = 0.2;
  params.effect = 0.5;
  params.seed = seed;
  SimulatedStudy study = simulate_study(params);

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("multimatch_bench_" + std::to_string(seed));
  fs::create_directories(dir);
  std::string units_path = (dir / "units.csv").string();
  std::string clusters_path = (dir / "clusters.csv").string();
  write_csv(study.units, units_path);
  write_csv(study.clusters, clusters_path);
  return load_dataset(units_path, clusters_path, study.schema);
}

// Mean balance on both simulated unit covariates plus one cluster covariate,
// loose enough that typical draws stay feasible.
inline BalanceSpec default_spec() {
  BalanceSpec spec;
  for (const char* name : {"x1", "x2"}) {
    BalanceConstraint c;
    c.kind = ConstraintKind::mean;
    c.covariate = name;
    c.level = Level::unit;
    c.tolerance = 0.35;
    spec.unit_constraints.push_back(c);
  }
  BalanceConstraint w;
  w.kind = ConstraintKind::mean;
  w.covariate = "w1";
  w.level = Level::cluster;
  w.tolerance = 0.6;
  spec.cluster_constraints.push_back(w);
  return spec;
}

}  // namespace multimatch::bench

#endif  // MULTIMATCH_BENCHMARKS_BENCH_UTIL_HPP_
