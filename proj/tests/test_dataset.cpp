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

#include "multimatch/dataset.hpp"
#include "multimatch/errors.hpp"
#include "test_util.hpp"

using namespace multimatch;
using namespace multimatch::testing;

namespace {

std::vector<CovariateSchema> basic_schema() {
  return {cov("x", Kind::continuous, Level::unit),
          cov("w", Kind::continuous, Level::cluster)};
}

// Treated units x = {1,2,3}; control units x = {2,4}.
const char* kUnits =
    "unit_id,cluster_id,x\n"
    "t1u1,t1,1\n"
    "t1u2,t1,2\n"
    "t1u3,t1,3\n"
    "c1u1,c1,2\n"
    "c1u2,c1,4\n";
const char* kClusters =
    "cluster_id,treated,w\n"
    "t1,1,0.5\n"
    "c1,0,1.5\n";

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("loads a valid two-level sample") {
  Dataset d = make_dataset(kUnits, kClusters, basic_schema());
  CHECK(d.clusters.size() == 2);
  CHECK(d.treated_clusters().size() == 1);
  CHECK(d.control_clusters().size() == 1);
  CHECK(d.units_of(true).size() == 3);
  CHECK(d.units_of(false).size() == 2);
  CHECK(d.n_units() == 5);
  REQUIRE(d.find_unit("c1u2") != nullptr);
  CHECK(d.find_unit("c1u2")->covariates[d.unit_cov_index("x")] == 4.0);
  CHECK(d.find_cluster("t1")->treated);
  CHECK(d.outcome_index() == -1);
}

TEST_CASE("pooled SD averages the two arm variances") {
  Dataset d = make_dataset(kUnits, kClusters, basic_schema());
  // var{1,2,3} = 1, var{2,4} = 2 -> sqrt((1+2)/2).
  CHECK(pooled_std(d, Level::unit, "x") == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
  CHECK_THROWS_AS(pooled_std(d, Level::unit, "nope"), spec_error);
}

TEST_CASE("standardized difference uses the supplied pooled scale") {
  Dataset d = make_dataset(kUnits, kClusters, basic_schema());
  int j = d.unit_cov_index("x");
  double sd = standardized_difference(d.units_of(true), d.units_of(false), j,
                                      pooled_std(d, Level::unit, "x"));
  CHECK(sd == doctest::Approx((2.0 - 3.0) / std::sqrt(1.5)).epsilon(1e-12));
  // Degenerate scale: equal means give 0, unequal give +-inf.
  CHECK(standardized_difference(d.units_of(true), d.units_of(false), j, 0.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("mean_of rejects an empty group") {
  Dataset d = make_dataset(kUnits, kClusters, basic_schema());
  CHECK_THROWS_AS(mean_of({}, 0), data_error);
}

TEST_CASE("duplicate unit id is rejected") {
  std::string units =
      "unit_id,cluster_id,x\n"
      "u1,t1,1\n"
      "u1,t1,2\n"
      "c1u1,c1,2\n";
  CHECK_THROWS_WITH_AS(make_dataset(units, kClusters, basic_schema()),
                       doctest::Contains("duplicate unit_id"), data_error);
}

TEST_CASE("unit referencing an unknown cluster is rejected") {
  std::string units =
      "unit_id,cluster_id,x\n"
      "u1,ghost,1\n"
      "c1u1,c1,2\n";
  CHECK_THROWS_WITH_AS(make_dataset(units, kClusters, basic_schema()),
                       doctest::Contains("does not appear"), data_error);
}

TEST_CASE("missing covariate column is rejected") {
  CHECK_THROWS_WITH_AS(
      make_dataset("unit_id,cluster_id\nu1,t1\nc1u1,c1\n", kClusters, basic_schema()),
      doctest::Contains("missing column for covariate 'x'"), data_error);
}

TEST_CASE("unexpected column is rejected") {
  std::string units =
      "unit_id,cluster_id,x,extra\n"
      "u1,t1,1,9\n"
      "c1u1,c1,2,9\n";
  CHECK_THROWS_WITH_AS(make_dataset(units, kClusters, basic_schema()),
                       doctest::Contains("unexpected column 'extra'"), data_error);
}

TEST_CASE("single-arm samples are rejected") {
  std::string clusters =
      "cluster_id,treated,w\n"
      "t1,1,0.5\n"
      "c1,1,1.5\n";
  CHECK_THROWS_WITH_AS(make_dataset(kUnits, clusters, basic_schema()),
                       doctest::Contains("no control clusters"), data_error);
}

TEST_CASE("NA under the error policy is rejected, under imputation it fills the mean") {
  std::string units =
      "unit_id,cluster_id,x\n"
      "t1u1,t1,1\n"
      "t1u2,t1,NA\n"
      "c1u1,c1,4\n";
  CHECK_THROWS_AS(make_dataset(units, kClusters, basic_schema()), data_error);

  auto schema = basic_schema();
  schema[0].missing = MissingPolicy::mean_impute_with_indicator;
  Dataset d = make_dataset(units, kClusters, schema);
  // Effective schema gains a derived x_missing indicator.
  int jx = d.unit_cov_index("x");
  int jm = d.unit_cov_index("x_missing");
  REQUIRE(jx >= 0);
  REQUIRE(jm >= 0);
  CHECK(d.unit_schema[jm].derived);
  const Unit* u = d.find_unit("t1u2");
  CHECK(u->imputed[jx]);
  CHECK(u->covariates[jx] == doctest::Approx(2.5));  // mean of 1 and 4
  CHECK(u->covariates[jm] == 1.0);
  CHECK(d.find_unit("t1u1")->covariates[jm] == 0.0);
}

TEST_CASE("nominal categories parse to indices and unknown labels fail") {
  auto schema = basic_schema();
  schema.push_back(cov("grade", Kind::nominal, Level::unit, Role::balance, {"a", "b"}));
  std::string units =
      "unit_id,cluster_id,x,grade\n"
      "t1u1,t1,1,b\n"
      "c1u1,c1,2,a\n";
  Dataset d = make_dataset(units, kClusters, schema);
  CHECK(d.find_unit("t1u1")->covariates[d.unit_cov_index("grade")] == 1.0);

  std::string bad =
      "unit_id,cluster_id,x,grade\n"
      "t1u1,t1,1,zz\n"
      "c1u1,c1,2,a\n";
  CHECK_THROWS_WITH_AS(make_dataset(bad, kClusters, schema),
                       doctest::Contains("not a declared category"), data_error);
}

TEST_CASE("outcome column sets has_outcome and NA leaves it unset") {
  auto schema = basic_schema();
  schema.push_back(cov("y", Kind::continuous, Level::unit, Role::outcome));
  std::string units =
      "unit_id,cluster_id,x,y\n"
      "t1u1,t1,1,10\n"
      "c1u1,c1,2,NA\n";
  Dataset d = make_dataset(units, kClusters, schema);
  CHECK(d.outcome_index() == d.unit_cov_index("y"));
  CHECK(d.find_unit("t1u1")->has_outcome);
  CHECK(d.find_unit("t1u1")->outcome == 10.0);
  CHECK_FALSE(d.find_unit("c1u1")->has_outcome);
}

TEST_CASE("stratum column is optional and parsed when present") {
  std::string clusters =
      "cluster_id,treated,stratum,w\n"
      "t1,1,north,0.5\n"
      "c1,0,NA,1.5\n";
  Dataset d = make_dataset(kUnits, clusters, basic_schema());
  CHECK(d.find_cluster("t1")->has_stratum);
  CHECK(d.find_cluster("t1")->stratum == "north");
  CHECK_FALSE(d.find_cluster("c1")->has_stratum);
}

TEST_CASE("save then load restores covariates and missingness") {
  auto schema = basic_schema();
  schema[0].missing = MissingPolicy::mean_impute_with_indicator;
  std::string units =
      "unit_id,cluster_id,x\n"
      "t1u1,t1,1\n"
      "t1u2,t1,NA\n"
      "c1u1,c1,4\n";
  Dataset d = make_dataset(units, kClusters, schema);

  TempDir dir;
  save_dataset(d, dir.file("u.csv"), dir.file("c.csv"));
  // The written table restores NA and omits the derived indicator.
  CHECK(read_file(dir.file("u.csv")).find("NA") != std::string::npos);
  Dataset back = load_dataset(dir.file("u.csv"), dir.file("c.csv"), schema);
  REQUIRE(back.n_units() == d.n_units());
  int jx = back.unit_cov_index("x");
  CHECK(back.find_unit("t1u2")->imputed[jx]);
  CHECK(back.find_unit("t1u2")->covariates[jx] == doctest::Approx(2.5));
  CHECK(back.find_unit("c1u1")->covariates[jx] == 4.0);
}

TEST_CASE("reserved and duplicate covariate names are rejected") {
  auto schema = basic_schema();
  schema.push_back(cov("x", Kind::continuous, Level::unit));
  CHECK_THROWS_AS(make_dataset(kUnits, kClusters, schema), config_error);

  auto reserved = basic_schema();
  reserved.push_back(cov("treated", Kind::continuous, Level::cluster));
  CHECK_THROWS_AS(make_dataset(kUnits, kClusters, reserved), config_error);
}

}  // TEST_SUITE
