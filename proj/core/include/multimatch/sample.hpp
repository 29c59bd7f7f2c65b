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

#ifndef MULTIMATCH_SAMPLE_HPP_
#define MULTIMATCH_SAMPLE_HPP_

#include <string>
#include <vector>

#include "multimatch/csv.hpp"
#include "multimatch/dataset.hpp"

namespace multimatch {

struct UnitPair {
  std::string treated_unit;
  std::string control_unit;
  double distance = 0;
};

struct ClusterPair {
  std::string treated_cluster;
  std::string control_cluster;
  std::vector<UnitPair> unit_pairs;
  double total_distance = 0;
  bool below_optimal = false;  // a per-pair solve hit its limits
};

enum class Strategy { dynamic, myopic_cardinality, myopic_optimal };

std::string strategy_name(Strategy s);

// A complete two-level match: disjoint treated/control cluster pairs, each
// holding disjoint unit pairs drawn from its own two clusters.
struct MatchedSample {
  Strategy provenance = Strategy::dynamic;
  std::vector<ClusterPair> cluster_pairs;

  size_t matched_unit_pairs() const;
  double total_distance() const;

  std::vector<const Unit*> matched_units(const Dataset& data, bool treated) const;
  std::vector<const Cluster*> matched_clusters(const Dataset& data, bool treated) const;

  // Checks pair disjointness, containment of unit pairs in their cluster
  // pair, and one-treated-one-control orientation against the dataset;
  // throws data_error on the first violation.
  void validate(const Dataset& data) const;
};

// cluster_pairs.csv: pair_id,treated_cluster,control_cluster,m,total_distance
CsvTable cluster_pairs_csv(const MatchedSample& sample);
// unit_pairs.csv: pair_id,treated_unit,control_unit,distance
CsvTable unit_pairs_csv(const MatchedSample& sample);

// Rebuilds a MatchedSample from the two CSVs, validating against the
// dataset.
MatchedSample load_sample(const std::string& cluster_pairs_path,
                          const std::string& unit_pairs_path, const Dataset& data);

}  // namespace multimatch

#endif  // MULTIMATCH_SAMPLE_HPP_
