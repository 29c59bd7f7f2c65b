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

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "multimatch/dataset.hpp"
#include "multimatch/errors.hpp"
#include "multimatch/simulate.hpp"
#include "test_util.hpp"

using namespace multimatch;
using namespace multimatch::testing;

namespace {

std::string render(const CsvTable& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

Dataset load(const SimulatedStudy& study) {
  TempDir dir;
  write_csv(study.units, dir.file("units.csv"));
  write_csv(study.clusters, dir.file("clusters.csv"));
  return load_dataset(dir.file("units.csv"), dir.file("clusters.csv"), study.schema);
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("shapes and headers follow the requested dimensions") {
  SimulateParams params;
  params.treated_clusters = 3;
  params.control_clusters = 4;
  params.units_per_cluster = 5;
  params.covariate_dims = 2;
  SimulatedStudy study = simulate_study(params);

  CHECK(study.clusters.rows.size() == 7);
  CHECK(study.units.rows.size() == 35);
  CHECK(study.units.header ==
        std::vector<std::string>{"unit_id", "cluster_id", "x1", "x2", "y"});
  CHECK(study.clusters.header ==
        std::vector<std::string>{"cluster_id", "treated", "w1", "w2"});

  int treated = 0;
  int col = study.clusters.column("treated");
  for (const auto& row : study.clusters.rows) treated += row[col] == "1" ? 1 : 0;
  CHECK(treated == 3);  // treated arm size is exact, not probabilistic
}

TEST_CASE("the schema and tables load as a valid dataset") {
  SimulateParams params;
  params.effect = 1.0;
  SimulatedStudy study = simulate_study(params);
  Dataset d = load(study);
  CHECK(d.clusters.size() == 10);
  CHECK(d.n_units() == 100);
  CHECK(d.outcome_index() >= 0);
  for (const auto& cl : d.clusters)
    for (const auto& u : cl.units) CHECK(u.has_outcome);
}

TEST_CASE("identical seeds reproduce the tables byte for byte") {
  SimulateParams params;
  params.seed = 42;
  SimulatedStudy a = simulate_study(params);
  SimulatedStudy b = simulate_study(params);
  CHECK(render(a.units) == render(b.units));
  CHECK(render(a.clusters) == render(b.clusters));

  params.seed = 43;
  SimulatedStudy c = simulate_study(params);
  CHECK(render(a.units) != render(c.units));
}

TEST_CASE("the treatment effect shifts the treated outcomes") {
  SimulateParams with, without;
  with.seed = without.seed = 7;
  with.effect = 50.0;  // dwarfs the unit and cluster noise
  with.treated_clusters = without.treated_clusters = 10;
  with.control_clusters = without.control_clusters = 10;
  SimulatedStudy study = simulate_study(with);
  Dataset d = load(study);
  double t_sum = 0, c_sum = 0;
  size_t t_n = 0, c_n = 0;
  int y = d.outcome_index();
  for (const auto& cl : d.clusters)
    for (const auto& u : cl.units) {
      (cl.treated ? t_sum : c_sum) += u.covariates[y];
      (cl.treated ? t_n : c_n) += 1;
    }
  CHECK(t_sum / t_n - c_sum / c_n > 25.0);
}

TEST_CASE("the intracluster correlation moves variance between levels") {
  // Decompose outcome variance into between- and within-cluster parts and
  // compare the between share across icc settings.
  auto between_share = [](double icc) {
    SimulateParams params;
    params.icc = icc;
    params.effect = 0.0;
    params.treated_clusters = 30;
    params.control_clusters = 30;
    params.units_per_cluster = 30;
    params.seed = 11;
    SimulatedStudy study = simulate_study(params);
    TempDir dir;
    write_csv(study.units, dir.file("u.csv"));
    write_csv(study.clusters, dir.file("c.csv"));
    Dataset d = load_dataset(dir.file("u.csv"), dir.file("c.csv"), study.schema);
    int y = d.outcome_index();
    double grand = 0;
    size_t n = 0;
    for (const auto& cl : d.clusters)
      for (const auto& u : cl.units) {
        grand += u.covariates[y];
        ++n;
      }
    grand /= static_cast<double>(n);
    double between = 0, total = 0;
    for (const auto& cl : d.clusters) {
      double m = 0;
      for (const auto& u : cl.units) m += u.covariates[y];
      m /= static_cast<double>(cl.units.size());
      between += cl.units.size() * (m - grand) * (m - grand);
      for (const auto& u : cl.units)
        total += (u.covariates[y] - grand) * (u.covariates[y] - grand);
    }
    return between / total;
  };
  double low = between_share(0.01);
  double high = between_share(0.6);
  CHECK(low < 0.15);
  CHECK(high > 0.4);
  CHECK(high > low);
}

TEST_CASE("parameter validation rejects impossible studies") {
  SimulateParams bad;
  bad.treated_clusters = 0;
  CHECK_THROWS_AS(simulate_study(bad), config_error);
  bad = SimulateParams{};
  bad.icc = 1.5;
  CHECK_THROWS_AS(simulate_study(bad), config_error);
  bad = SimulateParams{};
  bad.units_per_cluster = 0;
  CHECK_THROWS_AS(simulate_study(bad), config_error);
  bad = SimulateParams{};
  bad.covariate_dims = 0;
  CHECK_THROWS_AS(simulate_study(bad), config_error);
}

}  // TEST_SUITE
