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

#include "multimatch/balance.hpp"
#include "multimatch/errors.hpp"
#include "multimatch/sample.hpp"
#include "test_util.hpp"

using namespace multimatch;
using namespace multimatch::testing;

namespace {

// Units carrying only the covariate values, detached from any dataset.
std::vector<Unit> make_units(const std::vector<std::vector<double>>& rows) {
  std::vector<Unit> units(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    units[i].unit_id = "u" + std::to_string(i);
    units[i].covariates = rows[i];
  }
  return units;
}

std::vector<const Unit*> ptrs(const std::vector<Unit>& units) {
  std::vector<const Unit*> out;
  for (const auto& u : units) out.push_back(&u);
  return out;
}

BalanceConstraint constraint(ConstraintKind kind, std::string covariate, Level level) {
  BalanceConstraint c;
  c.kind = kind;
  c.covariate = std::move(covariate);
  c.level = level;
  return c;
}

}  // namespace

TEST_SUITE("balance") {

TEST_CASE("ks statistic is the largest ECDF gap") {
  CHECK(ks_statistic({1, 2}, {1, 3}) == doctest::Approx(0.5));
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(ks_statistic({1, 2}, {3, 4}) == doctest::Approx(1.0));
}

TEST_CASE("fine balance deviation is half the summed count differences") {
  CovariateSchema grade = cov("grade", Kind::nominal, Level::unit, Role::balance,
                              {"low", "high"});
  // Treated 3 low + 2 high; control 2 low + 3 high.
  auto t = make_units({{0}, {0}, {0}, {1}, {1}});
  auto c = make_units({{0}, {0}, {1}, {1}, {1}});
  CHECK(fine_balance_deviation(ptrs(t), ptrs(c), grade, 0) == doctest::Approx(1.0));
}

TEST_CASE("fine balance deviation on realistic category counts") {
  CovariateSchema edu = cov("edu", Kind::nominal, Level::unit, Role::balance,
                            {"secondary", "higher"});
  // Marginals 4634/4168 against 4638/4164: two categories off by 4 each.
  std::vector<std::vector<double>> t_rows, c_rows;
  for (int i = 0; i < 4634; ++i) t_rows.push_back({0});
  for (int i = 0; i < 4168; ++i) t_rows.push_back({1});
  for (int i = 0; i < 4638; ++i) c_rows.push_back({0});
  for (int i = 0; i < 4164; ++i) c_rows.push_back({1});
  auto t = make_units(t_rows);
  auto c = make_units(c_rows);
  CHECK(fine_balance_deviation(ptrs(t), ptrs(c), edu, 0) == doctest::Approx(4.0));
}

TEST_CASE("total variation distance sums half absolute proportion gaps") {
  std::vector<CovariateSchema> schema = {
      cov("g", Kind::nominal, Level::unit, Role::balance, {"a", "b"})};
  // Treated proportions (0.6, 0.4); control (0.2, 0.8).
  auto t = make_units({{0}, {0}, {0}, {1}, {1}});
  auto c = make_units({{0}, {1}, {1}, {1}, {1}});
  CHECK(total_variation_distance(ptrs(t), ptrs(c), {0}, schema) == doctest::Approx(0.4));
}

TEST_CASE("validate_spec rejects mismatched kinds and unknown names") {
  Dataset d = make_dataset(
      "unit_id,cluster_id,x,g\n"
      "t1u1,t1,1,a\n"
      "c1u1,c1,2,b\n",
      "cluster_id,treated,w\n"
      "t1,1,0\n"
      "c1,0,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("g", Kind::nominal, Level::unit, Role::balance, {"a", "b"}),
       cov("w", Kind::continuous, Level::cluster)});

  BalanceSpec ok;
  ok.unit_constraints.push_back(constraint(ConstraintKind::mean, "x", Level::unit));
  ok.unit_constraints.push_back(constraint(ConstraintKind::fine, "g", Level::unit));
  ok.cluster_constraints.push_back(constraint(ConstraintKind::mean, "w", Level::cluster));
  CHECK_NOTHROW(validate_spec(ok, d));

  BalanceSpec unknown;
  unknown.unit_constraints.push_back(constraint(ConstraintKind::mean, "zz", Level::unit));
  CHECK_THROWS_AS(validate_spec(unknown, d), spec_error);

  BalanceSpec fine_on_numeric;
  fine_on_numeric.unit_constraints.push_back(
      constraint(ConstraintKind::fine, "x", Level::unit));
  CHECK_THROWS_AS(validate_spec(fine_on_numeric, d), spec_error);

  BalanceSpec mean_on_nominal;
  mean_on_nominal.unit_constraints.push_back(
      constraint(ConstraintKind::mean, "g", Level::unit));
  CHECK_THROWS_AS(validate_spec(mean_on_nominal, d), spec_error);

  BalanceSpec wrong_level;
  wrong_level.unit_constraints.push_back(constraint(ConstraintKind::mean, "w", Level::cluster));
  CHECK_THROWS_AS(validate_spec(wrong_level, d), spec_error);

  BalanceSpec weighted_unit;
  auto wu = constraint(ConstraintKind::mean, "x", Level::unit);
  wu.weight_by_cluster_size = true;
  weighted_unit.unit_constraints.push_back(wu);
  CHECK_THROWS_AS(validate_spec(weighted_unit, d), spec_error);
}

TEST_CASE("mean rows encode the count-scaled tolerance") {
  // Treated x = {1,3}; control x = {2,4}; pooled SD = sqrt(2).
  Dataset d = make_dataset(
      "unit_id,cluster_id,x\n"
      "t1u1,t1,1\n"
      "t1u2,t1,3\n"
      "c1u1,c1,2\n"
      "c1u2,c1,4\n",
      "cluster_id,treated,w\n"
      "t1,1,0\n"
      "c1,0,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("w", Kind::continuous, Level::cluster)});
  CHECK(pooled_std(d, Level::unit, "x") == doctest::Approx(std::sqrt(2.0)));

  BalanceSpec spec;
  auto c = constraint(ConstraintKind::mean, "x", Level::unit);
  c.tolerance = 0.8;  // bound per selected pair: 0.8 * sqrt(2) ~ 1.131
  spec.unit_constraints.push_back(c);

  auto treated = d.units_of(true);
  auto control = d.units_of(false);
  std::vector<std::pair<int, int>> edges = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  EdgeConstraintSet set = build_unit_constraints(spec, d, treated, control, edges);

  // 4 degree rows plus the two mean rows.
  REQUIRE(set.rows.size() == 6);
  auto feasible = [&set](const std::vector<double>& x) {
    for (const auto& row : set.rows)
      if (!row.satisfied(x)) return false;
    return true;
  };
  CHECK(feasible({1, 0, 0, 0}));        // |1-2| = 1 within one-pair bound
  CHECK_FALSE(feasible({0, 1, 0, 0}));  // |1-4| = 3 beyond it
  // With two pairs the bound doubles: sum (1-4)+(3-2) = -2 fits, as does
  // the straight pairing (1-2)+(3-4) = -2.
  CHECK(feasible({0, 1, 1, 0}));
  CHECK(feasible({1, 0, 0, 1}));
}

TEST_CASE("degree rows forbid reusing a unit") {
  Dataset d = make_dataset(
      "unit_id,cluster_id,x\n"
      "t1u1,t1,1\n"
      "c1u1,c1,1\n"
      "c1u2,c1,1\n",
      "cluster_id,treated,w\n"
      "t1,1,0\n"
      "c1,0,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("w", Kind::continuous, Level::cluster)});
  BalanceSpec spec;
  std::vector<std::pair<int, int>> edges = {{0, 0}, {0, 1}};
  EdgeConstraintSet set =
      build_unit_constraints(spec, d, d.units_of(true), d.units_of(false), edges);
  auto feasible = [&set](const std::vector<double>& x) {
    for (const auto& row : set.rows)
      if (!row.satisfied(x)) return false;
    return true;
  };
  CHECK(feasible({1, 0}));
  CHECK(feasible({0, 1}));
  CHECK_FALSE(feasible({1, 1}));  // treated unit used twice
}

TEST_CASE("exact constraint excludes crossing edges and pins them to zero") {
  Dataset d = make_dataset(
      "unit_id,cluster_id,x,g\n"
      "t1u1,t1,1,a\n"
      "c1u1,c1,1,b\n"
      "c1u2,c1,1,a\n",
      "cluster_id,treated,w\n"
      "t1,1,0\n"
      "c1,0,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("g", Kind::nominal, Level::unit, Role::balance, {"a", "b"}),
       cov("w", Kind::continuous, Level::cluster)});
  BalanceSpec spec;
  spec.unit_constraints.push_back(constraint(ConstraintKind::exact, "g", Level::unit));
  std::vector<std::pair<int, int>> edges = {{0, 0}, {0, 1}};
  EdgeConstraintSet set =
      build_unit_constraints(spec, d, d.units_of(true), d.units_of(false), edges);
  CHECK(set.excluded[0] == 1);  // a vs b crosses
  CHECK(set.excluded[1] == 0);
  bool has_pin = false;
  for (const auto& row : set.rows)
    has_pin |= row.name.find("edge 0") != std::string::npos &&
               !row.satisfied({1, 0}) && row.satisfied({0, 1});
  CHECK(has_pin);
}

TEST_CASE("cluster stratum exact constraint uses the stratum column") {
  Dataset d = make_dataset(
      "unit_id,cluster_id,x\n"
      "t1u1,t1,1\n"
      "t2u1,t2,1\n"
      "c1u1,c1,1\n",
      "cluster_id,treated,stratum,w\n"
      "t1,1,north,0\n"
      "t2,1,south,0\n"
      "c1,0,north,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("w", Kind::continuous, Level::cluster)});
  BalanceSpec spec;
  spec.cluster_constraints.push_back(
      constraint(ConstraintKind::exact, "stratum", Level::cluster));
  CHECK_NOTHROW(validate_spec(spec, d));
  std::vector<std::pair<int, int>> edges = {{0, 0}, {1, 0}};  // (t1,c1), (t2,c1)
  EdgeConstraintSet set = build_cluster_constraints(spec, d, d.treated_clusters(),
                                                    d.control_clusters(), edges);
  CHECK(set.excluded[0] == 0);  // north-north
  CHECK(set.excluded[1] == 1);  // south-north crosses
}

TEST_CASE("ks rows bound the ECDF gap at pre-match quantile cuts") {
  Dataset d = make_dataset(
      "unit_id,cluster_id,x\n"
      "t1u1,t1,1\n"
      "t1u2,t1,2\n"
      "t1u3,t1,3\n"
      "c1u1,c1,1\n"
      "c1u2,c1,2\n"
      "c1u3,c1,3\n",
      "cluster_id,treated,w\n"
      "t1,1,0\n"
      "c1,0,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("w", Kind::continuous, Level::cluster)});
  BalanceSpec spec;
  auto c = constraint(ConstraintKind::ks, "x", Level::unit);
  c.max_gap = 0.4;
  c.grid_size = 5;
  spec.unit_constraints.push_back(c);
  // Identity edges plus one crossing edge pairing x=1 with x=3.
  std::vector<std::pair<int, int>> edges = {{0, 0}, {1, 1}, {2, 2}, {0, 2}};
  EdgeConstraintSet set =
      build_unit_constraints(spec, d, d.units_of(true), d.units_of(false), edges);
  auto feasible = [&set](const std::vector<double>& x) {
    for (const auto& row : set.rows)
      if (!row.satisfied(x)) return false;
    return true;
  };
  // Identity matching: ECDFs agree everywhere.
  CHECK(feasible({1, 1, 1, 0}));
  // Single skew pair (1 vs 3): gap 1 at the low cut exceeds 0.4.
  CHECK_FALSE(feasible({0, 0, 0, 1}));
}

TEST_CASE("balance report flags violated constraints and counts them") {
  Dataset d = make_dataset(
      "unit_id,cluster_id,x\n"
      "t1u1,t1,0\n"
      "t1u2,t1,10\n"
      "c1u1,c1,0.5\n"
      "c1u2,c1,10.5\n",
      "cluster_id,treated,w\n"
      "t1,1,0\n"
      "c1,0,1\n",
      {cov("x", Kind::continuous, Level::unit),
       cov("w", Kind::continuous, Level::cluster)});

  MatchedSample sample;
  ClusterPair cp;
  cp.treated_cluster = "t1";
  cp.control_cluster = "c1";
  cp.unit_pairs = {{"t1u1", "c1u1", 0.0}, {"t1u2", "c1u2", 0.0}};
  sample.cluster_pairs.push_back(cp);

  double sd = pooled_std(d, Level::unit, "x");
  BalanceSpec spec;
  auto loose = constraint(ConstraintKind::mean, "x", Level::unit);
  loose.tolerance = 0.6 / sd;  // achieved |mean diff| is 0.5
  spec.unit_constraints.push_back(loose);

  BalanceReport report = balance_report(sample, d, spec);
  CHECK(report.violations == 0);
  // matched_units counts unit pairs, one per matched treated unit.
  CHECK(report.matched_units == 2);
  CHECK(report.matched_cluster_pairs == 1);
  REQUIRE(report.checks.size() == 1);
  // achieved is reported in SD units: |5 - 5.5| / pooled SD.
  CHECK(report.checks[0].achieved == doctest::Approx(0.5 / sd));
  CHECK_FALSE(report.checks[0].violated);

  BalanceSpec tight;
  auto t = constraint(ConstraintKind::mean, "x", Level::unit);
  t.tolerance = 0.4 / sd;
  tight.unit_constraints.push_back(t);
  BalanceReport bad = balance_report(sample, d, tight);
  CHECK(bad.violations == 1);
  CHECK(bad.checks[0].violated);

  CsvTable csv = balance_report_csv(report);
  CHECK(csv.column("covariate") >= 0);
  CHECK(csv.column("std_diff") >= 0);
}

}  // TEST_SUITE
