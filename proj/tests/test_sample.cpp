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

#include "multimatch/errors.hpp"
#include "multimatch/sample.hpp"
#include "test_util.hpp"

using namespace multimatch;
using namespace multimatch::testing;

namespace {

// Two treated and two control clusters, two units each.
Dataset fixture() {
  std::string units =
      "unit_id,cluster_id,x\n"
      "t1a,t1,1\nt1b,t1,2\n"
      "t2a,t2,3\nt2b,t2,4\n"
      "c1a,c1,1\nc1b,c1,2\n"
      "c2a,c2,3\nc2b,c2,4\n";
  std::string clusters =
      "cluster_id,treated\n"
      "t1,1\nt2,1\nc1,0\nc2,0\n";
  return make_dataset(units, clusters, {cov("x", Kind::continuous, Level::unit)});
}

MatchedSample good_sample() {
  MatchedSample s;
  ClusterPair p1;
  p1.treated_cluster = "t1";
  p1.control_cluster = "c1";
  p1.unit_pairs = {{"t1a", "c1a", 0.5}, {"t1b", "c1b", 1.5}};
  p1.total_distance = 2.0;
  ClusterPair p2;
  p2.treated_cluster = "t2";
  p2.control_cluster = "c2";
  p2.unit_pairs = {{"t2a", "c2b", 0.25}};
  p2.total_distance = 0.25;
  s.cluster_pairs = {p1, p2};
  return s;
}

}  // namespace

TEST_SUITE("sample") {

TEST_CASE("aggregates count unit pairs and sum distances") {
  MatchedSample s = good_sample();
  CHECK(s.matched_unit_pairs() == 3);
  CHECK(s.total_distance() == doctest::Approx(2.25));
  Dataset d = fixture();
  CHECK(s.matched_units(d, true).size() == 3);
  CHECK(s.matched_units(d, false).size() == 3);
  CHECK(s.matched_clusters(d, true).size() == 2);
  CHECK(s.matched_units(d, true)[0]->unit_id == "t1a");
}

TEST_CASE("a well-formed sample validates") {
  Dataset d = fixture();
  CHECK_NOTHROW(good_sample().validate(d));
}

TEST_CASE("validation rejects wrong orientation") {
  Dataset d = fixture();
  MatchedSample s = good_sample();
  std::swap(s.cluster_pairs[0].treated_cluster, s.cluster_pairs[0].control_cluster);
  std::swap(s.cluster_pairs[0].unit_pairs[0].treated_unit,
            s.cluster_pairs[0].unit_pairs[0].control_unit);
  CHECK_THROWS_WITH_AS(s.validate(d),
                       doctest::Contains("not one treated and one control"), data_error);
}

TEST_CASE("validation rejects cluster reuse across pairs") {
  Dataset d = fixture();
  MatchedSample s = good_sample();
  s.cluster_pairs[1].control_cluster = "c1";
  s.cluster_pairs[1].unit_pairs.clear();
  CHECK_THROWS_WITH_AS(s.validate(d), doctest::Contains("appears in two pairs"),
                       data_error);
}

TEST_CASE("validation rejects unit reuse inside a cluster pair") {
  Dataset d = fixture();
  MatchedSample s = good_sample();
  s.cluster_pairs[0].unit_pairs[1].control_unit = "c1a";  // also used by pair 0
  CHECK_THROWS_WITH_AS(s.validate(d), doctest::Contains("appears in two pairs"),
                       data_error);
}

TEST_CASE("validation rejects unit pairs outside their cluster pair") {
  Dataset d = fixture();
  MatchedSample s = good_sample();
  s.cluster_pairs[0].unit_pairs[0].control_unit = "c2a";  // c2, not c1
  CHECK_THROWS_WITH_AS(s.validate(d), doctest::Contains("outside its cluster pair"),
                       data_error);
}

TEST_CASE("validation rejects unknown identifiers") {
  Dataset d = fixture();
  MatchedSample s = good_sample();
  s.cluster_pairs[0].unit_pairs[0].treated_unit = "ghost";
  CHECK_THROWS_WITH_AS(s.validate(d), doctest::Contains("unknown unit"), data_error);
  s = good_sample();
  s.cluster_pairs[0].treated_cluster = "ghost";
  CHECK_THROWS_WITH_AS(s.validate(d), doctest::Contains("unknown cluster"), data_error);
}

TEST_CASE("csv emission carries ids, counts and distances") {
  CsvTable ct = cluster_pairs_csv(good_sample());
  REQUIRE(ct.rows.size() == 2);
  CHECK(ct.header == std::vector<std::string>{"pair_id", "treated_cluster",
                                              "control_cluster", "m", "total_distance"});
  CHECK(ct.rows[0] == std::vector<std::string>{"1", "t1", "c1", "2", "2"});
  CHECK(ct.rows[1] == std::vector<std::string>{"2", "t2", "c2", "1", "0.25"});

  CsvTable ut = unit_pairs_csv(good_sample());
  REQUIRE(ut.rows.size() == 3);
  CHECK(ut.rows[0] == std::vector<std::string>{"1", "t1a", "c1a", "0.5"});
  CHECK(ut.rows[2] == std::vector<std::string>{"2", "t2a", "c2b", "0.25"});
}

TEST_CASE("samples survive a csv round trip") {
  Dataset d = fixture();
  MatchedSample s = good_sample();
  TempDir dir;
  write_csv(cluster_pairs_csv(s), dir.file("cluster_pairs.csv"));
  write_csv(unit_pairs_csv(s), dir.file("unit_pairs.csv"));
  MatchedSample back =
      load_sample(dir.file("cluster_pairs.csv"), dir.file("unit_pairs.csv"), d);
  REQUIRE(back.cluster_pairs.size() == 2);
  CHECK(back.cluster_pairs[0].treated_cluster == "t1");
  CHECK(back.cluster_pairs[0].unit_pairs.size() == 2);
  CHECK(back.cluster_pairs[0].unit_pairs[1].control_unit == "c1b");
  CHECK(back.cluster_pairs[0].total_distance == doctest::Approx(2.0));
  CHECK(back.matched_unit_pairs() == 3);
}

TEST_CASE("loading rejects unit rows with unknown pair ids") {
  Dataset d = fixture();
  TempDir dir;
  write_file(dir.file("cp.csv"),
             "pair_id,treated_cluster,control_cluster,m,total_distance\n"
             "1,t1,c1,1,0\n");
  write_file(dir.file("up.csv"),
             "pair_id,treated_unit,control_unit,distance\n"
             "7,t1a,c1a,0\n");
  CHECK_THROWS_WITH_AS(load_sample(dir.file("cp.csv"), dir.file("up.csv"), d),
                       doctest::Contains("pair_id '7'"), data_error);
}

TEST_CASE("loading rejects tables missing required columns") {
  Dataset d = fixture();
  TempDir dir;
  write_file(dir.file("cp.csv"), "pair_id,treated_cluster\n1,t1\n");
  write_file(dir.file("up.csv"), "pair_id,treated_unit,control_unit\n");
  CHECK_THROWS_WITH_AS(load_sample(dir.file("cp.csv"), dir.file("up.csv"), d),
                       doctest::Contains("missing column 'control_cluster'"), data_error);
}

TEST_CASE("a loaded sample is validated against the dataset") {
  Dataset d = fixture();
  TempDir dir;
  write_file(dir.file("cp.csv"),
             "pair_id,treated_cluster,control_cluster,m,total_distance\n"
             "1,t1,c1,1,0\n");
  write_file(dir.file("up.csv"),
             "pair_id,treated_unit,control_unit,distance\n"
             "1,t1a,c2a,0\n");  // c2a lives in c2, not c1
  CHECK_THROWS_AS(load_sample(dir.file("cp.csv"), dir.file("up.csv"), d), data_error);
}

}  // TEST_SUITE
