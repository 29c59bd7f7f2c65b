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

#include <string>

#include "multimatch/config.hpp"
#include "multimatch/errors.hpp"
#include "test_util.hpp"

using namespace multimatch;
using namespace multimatch::testing;

namespace {

const char* kFullDoc = R"({
  "units": "units.csv",
  "clusters": "clusters.csv",
  "out": "results",
  "seed": 99,
  "covariates": [
    {"name": "x1", "kind": "continuous", "level": "unit"},
    {"name": "grade", "kind": "nominal", "level": "unit",
     "categories": ["a", "b", "c"], "missing": "mean_impute"},
    {"name": "w1", "kind": "continuous", "level": "cluster", "role": "distance_only"},
    {"name": "y", "kind": "continuous", "level": "unit", "role": "outcome"}
  ],
  "balance": {
    "unit": [
      {"type": "mean", "covariate": "x1", "tolerance": 0.2},
      {"type": "fine", "covariate": "grade", "slack": 1},
      {"type": "ks", "covariate": "x1", "max_gap": 0.15, "grid": 8}
    ],
    "cluster": [
      {"type": "mean", "covariate": "w1", "tolerance": 0.3,
       "weight_by_cluster_size": true},
      {"type": "exact", "covariate": "stratum"}
    ]
  },
  "distance": {
    "covariates": ["x1"],
    "caliper_width": 0.5,
    "propensity_covariates": ["x1"]
  },
  "matcher": {
    "objective": "max-cardinality",
    "lambda": 0.25,
    "approximate": false,
    "time_limit_seconds": 30,
    "workers": 2
  },
  "inference": {
    "weight_rule": "size-proportional",
    "alpha": 0.1,
    "deltas": [0.5, 1.0],
    "gamma_grid": [1.0, 2.0],
    "exact_when_small": false
  },
  "simulate": {
    "treated_clusters": 4,
    "control_clusters": 6,
    "units_per_cluster": 8,
    "covariate_dims": 2,
    "icc": 0.3,
    "effect": 1.5,
    "seed": 7
  }
})";

}  // namespace

TEST_SUITE("config") {

TEST_CASE("a complete document parses into every option block") {
  StudyConfig c = parse_study_config(kFullDoc, "test");
  CHECK(c.units_path == "units.csv");
  CHECK(c.clusters_path == "clusters.csv");
  CHECK(c.out_dir == "results");
  CHECK(c.seed == 99);

  REQUIRE(c.schema.size() == 4);
  CHECK(c.schema[0].name == "x1");
  CHECK(c.schema[1].kind == Kind::nominal);
  CHECK(c.schema[1].categories == std::vector<std::string>{"a", "b", "c"});
  CHECK(c.schema[1].missing == MissingPolicy::mean_impute_with_indicator);
  CHECK(c.schema[2].role == Role::distance_only);
  CHECK(c.schema[2].level == Level::cluster);
  CHECK(c.schema[3].role == Role::outcome);

  REQUIRE(c.balance.unit_constraints.size() == 3);
  CHECK(c.balance.unit_constraints[0].kind == ConstraintKind::mean);
  CHECK(c.balance.unit_constraints[0].tolerance == 0.2);
  CHECK(c.balance.unit_constraints[1].category_slack == 1);
  CHECK(c.balance.unit_constraints[2].max_gap == 0.15);
  CHECK(c.balance.unit_constraints[2].grid_size == 8);
  REQUIRE(c.balance.cluster_constraints.size() == 2);
  CHECK(c.balance.cluster_constraints[0].weight_by_cluster_size);
  CHECK(c.balance.cluster_constraints[1].kind == ConstraintKind::exact);
  CHECK(c.balance.cluster_constraints[1].level == Level::cluster);

  CHECK(c.distance.covariates == std::vector<std::string>{"x1"});
  CHECK(c.distance.caliper_width == 0.5);
  CHECK(c.matcher.objective == MatchObjective::max_cardinality);
  CHECK(c.matcher.lambda == 0.25);
  CHECK(c.matcher.workers == 2);
  CHECK(c.inference.weight_rule == WeightRule::size_proportional);
  CHECK(c.inference.alpha == 0.1);
  CHECK(c.inference.deltas == std::vector<double>{0.5, 1.0});
  CHECK_FALSE(c.inference.exact_when_small);
  CHECK(c.simulate.treated_clusters == 4);
  CHECK(c.simulate.icc == 0.3);
  CHECK(c.simulate.seed == 7);
}

TEST_CASE("defaults hold when optional blocks are absent") {
  StudyConfig c = parse_study_config(R"({"units": "u.csv", "clusters": "c.csv"})", "test");
  CHECK(c.out_dir == "out");
  CHECK(c.seed == 1);
  CHECK(c.matcher.objective == MatchObjective::max_cardinality);
  CHECK(c.matcher.lambda == 0.0);
  CHECK(c.inference.alpha == 0.05);
  CHECK(c.inference.exact_when_small);
  CHECK(c.simulate.seed == 1);  // inherits the top-level seed
}

TEST_CASE("the simulate seed inherits the study seed unless overridden") {
  StudyConfig c = parse_study_config(R"({"seed": 5, "simulate": {"icc": 0.1}})", "test");
  CHECK(c.simulate.seed == 5);
  StudyConfig o =
      parse_study_config(R"({"seed": 5, "simulate": {"seed": 9}})", "test");
  CHECK(o.simulate.seed == 9);
}

TEST_CASE("unknown keys are named in the error at every nesting level") {
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"unitz": "u.csv"})", "test"),
                       doctest::Contains("unknown key 'unitz'"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"balance": {"units": []}})", "test"),
      doctest::Contains("unknown key 'units' in balance"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(
          R"({"balance": {"unit": [{"type": "mean", "covariate": "x", "tol": 0.1}]}})",
          "test"),
      doctest::Contains("unknown key 'tol' in balance.unit[0]"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"matcher": {"threads": 2}})", "test"),
                       doctest::Contains("unknown key 'threads' in matcher"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"covariates": [{"name": "x", "kind": "continuous",
                             "level": "unit", "scale": true}]})",
                         "test"),
      doctest::Contains("unknown key 'scale'"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"simulate": {"clusters": 3}})", "test"),
                       doctest::Contains("unknown key 'clusters' in simulate"),
                       config_error);
}

TEST_CASE("enumerated fields reject unlisted values") {
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"matcher": {"objective": "fastest"}})", "test"),
      doctest::Contains("unknown matcher objective 'fastest'"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"inference": {"weight_rule": "equal"}})", "test"),
      doctest::Contains("unknown weight_rule 'equal'"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(
          R"({"covariates": [{"name": "x", "kind": "int", "level": "unit"}]})", "test"),
      doctest::Contains("unknown kind 'int'"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(
          R"({"balance": {"unit": [{"type": "median", "covariate": "x"}]}})", "test"),
      doctest::Contains("unknown constraint type 'median'"), config_error);
}

TEST_CASE("out-of-range numbers are rejected with the offending key") {
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"inference": {"alpha": 0}})", "test"),
                       doctest::Contains("alpha"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"inference": {"alpha": 1.2}})", "test"),
                       doctest::Contains("alpha"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"matcher": {"lambda": -0.1}})", "test"),
                       doctest::Contains("lambda"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"seed": -1})", "test"),
                       doctest::Contains("seed"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"simulate": {"icc": 1.0}})", "test"),
                       doctest::Contains("icc"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"distance": {"caliper_width": -1}})", "test"),
      doctest::Contains("caliper_width"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"inference": {"deltas": [0.5, -1]}})", "test"),
      doctest::Contains("deltas"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"inference": {"gamma_grid": [0.5]}})", "test"),
      doctest::Contains("gamma_grid"), config_error);
  CHECK_THROWS_WITH_AS(
      parse_study_config(R"({"matcher": {"time_limit_seconds": 0}})", "test"),
      doctest::Contains("time_limit_seconds"), config_error);
}

TEST_CASE("type mismatches name the key and the expected type") {
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"units": 3})", "test"),
                       doctest::Contains("'units' in test must be a string"),
                       config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"matcher": {"workers": 1.5}})", "test"),
                       doctest::Contains("must be an integer"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"matcher": {"approximate": "yes"}})",
                                          "test"),
                       doctest::Contains("must be a boolean"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"covariates": {}})", "test"),
                       doctest::Contains("'covariates' must be an array"), config_error);
}

TEST_CASE("malformed json reports the origin label") {
  CHECK_THROWS_WITH_AS(parse_study_config("{not json", "study.json"),
                       doctest::Contains("study.json"), config_error);
  CHECK_THROWS_WITH_AS(parse_study_config("[1, 2]", "study.json"),
                       doctest::Contains("top level must be an object"), config_error);
}

TEST_CASE("loading from disk reports unreadable paths") {
  TempDir dir;
  CHECK_THROWS_WITH_AS(load_study_config(dir.file("absent.json")),
                       doctest::Contains("cannot open config file"), config_error);
  write_file(dir.file("ok.json"), kFullDoc);
  StudyConfig c = load_study_config(dir.file("ok.json"));
  CHECK(c.seed == 99);
}

}  // TEST_SUITE
