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

#include <filesystem>
#include <string>
#include <vector>

#include "multimatch/commands.hpp"
#include "test_util.hpp"

using namespace multimatch;
using namespace multimatch::testing;

namespace {

namespace fs = std::filesystem;

// Anticorrelated two-by-two study with outcomes: the unit covariate x
// prefers the cross pairing that the cluster covariate w disprefers.
StudyConfig study_in(TempDir& dir) {
  std::string units = "unit_id,cluster_id,x,y\n";
  auto block = [&](const std::string& cl, double x, double effect) {
    for (int i = 1; i <= 4; ++i) {
      double y = x + 0.25 * i + effect;
      units += cl + "u" + std::to_string(i) + "," + cl + "," + std::to_string(x) + "," +
               std::to_string(y) + "\n";
    }
  };
  block("t1", 0, 2.0);
  block("t2", 10, 2.0);
  block("c1", 10, 0.0);
  block("c2", 0, 0.0);
  write_file(dir.file("units.csv"), units);
  write_file(dir.file("clusters.csv"),
             "cluster_id,treated,w\n"
             "t1,1,0\n"
             "t2,1,10\n"
             "c1,0,0.1\n"
             "c2,0,10.1\n");

  StudyConfig config;
  config.units_path = dir.file("units.csv");
  config.clusters_path = dir.file("clusters.csv");
  config.out_dir = dir.file("out");
  config.schema = {cov("x", Kind::continuous, Level::unit),
                   cov("w", Kind::continuous, Level::cluster),
                   cov("y", Kind::continuous, Level::unit, Role::outcome)};
  BalanceConstraint mean_x;
  mean_x.kind = ConstraintKind::mean;
  mean_x.covariate = "x";
  mean_x.level = Level::unit;
  mean_x.tolerance = 0.1;
  config.balance.unit_constraints.push_back(mean_x);
  config.matcher.workers = 1;
  return config;
}

bool exists(const StudyConfig& config, const std::string& name) {
  return fs::exists(fs::path(config.out_dir) / name);
}

CsvTable read_out(const StudyConfig& config, const std::string& name) {
  return read_csv((fs::path(config.out_dir) / name).string());
}

std::string read_out_text(const StudyConfig& config, const std::string& name) {
  return read_file((fs::path(config.out_dir) / name).string());
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("match writes the sample, the balance report and a summary") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  REQUIRE(cmd_match(config) == 0);
  for (const char* name :
       {"cluster_pairs.csv", "unit_pairs.csv", "balance_report.csv", "run_summary.json"})
    CHECK(exists(config, name));

  CsvTable cp = read_out(config, "cluster_pairs.csv");
  CHECK(cp.header == std::vector<std::string>{"pair_id", "treated_cluster",
                                              "control_cluster", "m", "total_distance"});
  REQUIRE(cp.rows.size() == 2);
  CsvTable up = read_out(config, "unit_pairs.csv");
  CHECK(up.rows.size() == 8);

  std::string summary = read_out_text(config, "run_summary.json");
  CHECK(summary.find("\"strategy\": \"dynamic\"") != std::string::npos);
  CHECK(summary.find("\"unit_pairs\": 8") != std::string::npos);
  CHECK(summary.find("\"balance_violations\": 0") != std::string::npos);
}

TEST_CASE("an unsatisfiable constraint system exits 4 and explains itself") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  BalanceConstraint tight;
  tight.kind = ConstraintKind::mean;
  tight.covariate = "w";
  tight.level = Level::cluster;
  tight.tolerance = 1e-6;
  config.balance.cluster_constraints.push_back(tight);
  CHECK(cmd_match(config) == 4);
  CHECK(read_out(config, "cluster_pairs.csv").rows.empty());
  CHECK_FALSE(exists(config, "balance_report.csv"));
  std::string summary = read_out_text(config, "run_summary.json");
  CHECK(summary.find("infeasibility") != std::string::npos);
}

TEST_CASE("configuration problems exit 2, data problems exit 3") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  StudyConfig no_paths = config;
  no_paths.units_path.clear();
  CHECK(cmd_match(no_paths) == 2);

  StudyConfig missing = config;
  missing.units_path = dir.file("absent.csv");
  CHECK(cmd_match(missing) == 3);

  StudyConfig bad_constraint = config;
  bad_constraint.balance.unit_constraints[0].covariate = "nope";
  CHECK(cmd_match(bad_constraint) == 2);
}

TEST_CASE("analyze consumes a previous match and writes the inference files") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  REQUIRE(cmd_match(config) == 0);
  REQUIRE(cmd_analyze(config) == 0);
  for (const char* name :
       {"inference_report.json", "inference_report.txt", "gamma_sweep.csv"})
    CHECK(exists(config, name));

  std::string json = read_out_text(config, "inference_report.json");
  CHECK(json.find("\"p_one_sided\"") != std::string::npos);
  CHECK(json.find("\"tau_hat\"") != std::string::npos);
  CsvTable sweep = read_out(config, "gamma_sweep.csv");
  CHECK(sweep.rows.size() == 21);  // default gamma grid

  // Without a prior match there is nothing to analyze.
  StudyConfig fresh = study_in(dir);
  fresh.out_dir = dir.file("empty_out");
  CHECK(cmd_analyze(fresh) == 3);
}

TEST_CASE("analyze requires outcomes on the matched units") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  config.schema[2].role = Role::ignore;  // hide the outcome column
  REQUIRE(cmd_match(config) == 0);
  CHECK(cmd_analyze(config) == 3);
}

TEST_CASE("balance writes the four diagnostic tables with fixed headers") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  REQUIRE(cmd_match(config) == 0);
  REQUIRE(cmd_balance(config) == 0);

  CsvTable mean = read_out(config, "unit_mean_balance.csv");
  CHECK(mean.header ==
        std::vector<std::string>{"covariate", "mean_treated", "mean_control", "std_diff"});
  REQUIRE(mean.rows.size() == 1);  // x only; y is the outcome
  CHECK(mean.rows[0][0] == "x");
  CHECK(mean.rows[0][3] == "0");  // crossed pairing balances x exactly

  CsvTable fine = read_out(config, "unit_fine_balance.csv");
  CHECK(fine.header == std::vector<std::string>{"covariate", "category", "count_treated",
                                                "count_control"});
  CHECK(fine.rows.empty());  // no nominal covariates in this study

  CsvTable cluster = read_out(config, "cluster_mean_balance.csv");
  CHECK(cluster.header == std::vector<std::string>{"covariate", "weighted", "mean_treated",
                                                   "mean_control", "std_diff"});
  REQUIRE(cluster.rows.size() == 2);  // w unweighted and weighted
  CHECK(cluster.rows[0][0] == "w");
  CHECK(cluster.rows[0][1] == "no");
  CHECK(cluster.rows[1][1] == "yes");

  CsvTable desc = read_out(config, "sample_description.csv");
  CHECK(desc.header ==
        std::vector<std::string>{"covariate", "treated_all", "treated_unmatched",
                                 "treated_matched", "control_matched",
                                 "control_unmatched", "control_all"});
  REQUIRE(desc.rows.size() == 1);  // x; outcome excluded
  CHECK(desc.rows[0][0] == "x");
  // Everyone is matched in this study: matched and all columns agree.
  CHECK(desc.rows[0][1] == desc.rows[0][3]);
  CHECK(desc.rows[0][4] == desc.rows[0][6]);
}

TEST_CASE("compare ranks the three strategies in one table") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  REQUIRE(cmd_compare(config) == 0);
  CsvTable table = read_out(config, "comparison.csv");
  CHECK(table.header ==
        std::vector<std::string>{"method", "schools", "students",
                                 "mean_imbalances_school", "tv_students",
                                 "problems_solved", "time_minutes"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][0] == "myopic-optimal");
  CHECK(table.rows[1][0] == "myopic-cardinality");
  CHECK(table.rows[2][0] == "dynamic");

  long students_cardinality = std::stol(table.rows[1][2]);
  long students_dynamic = std::stol(table.rows[2][2]);
  CHECK(students_dynamic == 16);
  CHECK(students_cardinality == 0);
  // Shared constraints: the dynamic strategy never matches fewer units.
  CHECK(students_dynamic >= students_cardinality);
}

TEST_CASE("compare output is deterministic apart from the timing column") {
  TempDir dir;
  StudyConfig config = study_in(dir);
  config.matcher.workers = 2;
  StudyConfig again = config;
  again.out_dir = dir.file("out2");
  REQUIRE(cmd_compare(config) == 0);
  REQUIRE(cmd_compare(again) == 0);
  CsvTable a = read_out(config, "comparison.csv");
  CsvTable b = read_out(again, "comparison.csv");
  REQUIRE(a.rows.size() == b.rows.size());
  int time_col = a.column("time_minutes");
  for (size_t r = 0; r < a.rows.size(); ++r)
    for (size_t c = 0; c < a.rows[r].size(); ++c)
      if (static_cast<int>(c) != time_col) CHECK(a.rows[r][c] == b.rows[r][c]);
}

TEST_CASE("simulate writes a loadable synthetic study") {
  TempDir dir;
  StudyConfig config;
  config.out_dir = dir.file("sim");
  config.simulate.treated_clusters = 3;
  config.simulate.control_clusters = 3;
  config.simulate.units_per_cluster = 4;
  config.simulate.covariate_dims = 2;
  config.simulate.seed = 5;
  REQUIRE(cmd_simulate(config) == 0);
  CHECK(exists(config, "units.csv"));
  CHECK(exists(config, "clusters.csv"));
  CsvTable units = read_out(config, "units.csv");
  CHECK(units.rows.size() == 24);

  StudyConfig bad = config;
  bad.simulate.icc = 2.0;
  CHECK(cmd_simulate(bad) == 2);
}

}  // TEST_SUITE
