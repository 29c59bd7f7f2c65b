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

#include "multimatch/sample.hpp"

#include <unordered_map>
#include <unordered_set>

#include "multimatch/errors.hpp"

namespace multimatch {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::dynamic: return "dynamic";
    case Strategy::myopic_cardinality: return "myopic-cardinality";
    case Strategy::myopic_optimal: return "myopic-optimal";
  }
  return "unknown";
}

size_t MatchedSample::matched_unit_pairs() const {
  size_t n = 0;
  for (const auto& cp : cluster_pairs) n += cp.unit_pairs.size();
  return n;
}

double MatchedSample::total_distance() const {
  double d = 0;
  for (const auto& cp : cluster_pairs) d += cp.total_distance;
  return d;
}

std::vector<const Unit*> MatchedSample::matched_units(const Dataset& data,
                                                      bool treated) const {
  std::vector<const Unit*> out;
  for (const auto& cp : cluster_pairs)
    for (const auto& up : cp.unit_pairs) {
      const Unit* u = data.find_unit(treated ? up.treated_unit : up.control_unit);
      if (!u) throw data_error("matched unit not present in dataset");
      out.push_back(u);
    }
  return out;
}

std::vector<const Cluster*> MatchedSample::matched_clusters(const Dataset& data,
                                                            bool treated) const {
  std::vector<const Cluster*> out;
  for (const auto& cp : cluster_pairs) {
    const Cluster* cl =
        data.find_cluster(treated ? cp.treated_cluster : cp.control_cluster);
    if (!cl) throw data_error("matched cluster not present in dataset");
    out.push_back(cl);
  }
  return out;
}

void MatchedSample::validate(const Dataset& data) const {
  std::unordered_set<std::string> used_clusters, used_units;
  for (const auto& cp : cluster_pairs) {
    const Cluster* t = data.find_cluster(cp.treated_cluster);
    const Cluster* c = data.find_cluster(cp.control_cluster);
    if (!t || !c)
      throw data_error("cluster pair references unknown cluster '" +
                       (t ? cp.control_cluster : cp.treated_cluster) + "'");
    if (!t->treated || c->treated)
      throw data_error("cluster pair (" + cp.treated_cluster + ", " + cp.control_cluster +
                       ") is not one treated and one control cluster");
    if (!used_clusters.insert(cp.treated_cluster).second)
      throw data_error("cluster '" + cp.treated_cluster + "' appears in two pairs");
    if (!used_clusters.insert(cp.control_cluster).second)
      throw data_error("cluster '" + cp.control_cluster + "' appears in two pairs");
    for (const auto& up : cp.unit_pairs) {
      const Unit* ut = data.find_unit(up.treated_unit);
      const Unit* uc = data.find_unit(up.control_unit);
      if (!ut || !uc)
        throw data_error("unit pair references unknown unit '" +
                         (ut ? up.control_unit : up.treated_unit) + "'");
      if (ut->cluster_id != cp.treated_cluster || uc->cluster_id != cp.control_cluster)
        throw data_error("unit pair (" + up.treated_unit + ", " + up.control_unit +
                         ") lies outside its cluster pair");
      if (!used_units.insert(up.treated_unit).second)
        throw data_error("unit '" + up.treated_unit + "' appears in two pairs");
      if (!used_units.insert(up.control_unit).second)
        throw data_error("unit '" + up.control_unit + "' appears in two pairs");
    }
  }
}

CsvTable cluster_pairs_csv(const MatchedSample& sample) {
  CsvTable t;
  t.header = {"pair_id", "treated_cluster", "control_cluster", "m", "total_distance"};
  int id = 1;
  for (const auto& cp : sample.cluster_pairs) {
    t.rows.push_back({std::to_string(id++), cp.treated_cluster, cp.control_cluster,
                      std::to_string(cp.unit_pairs.size()),
                      format_number(cp.total_distance)});
  }
  return t;
}

CsvTable unit_pairs_csv(const MatchedSample& sample) {
  CsvTable t;
  t.header = {"pair_id", "treated_unit", "control_unit", "distance"};
  int id = 1;
  for (const auto& cp : sample.cluster_pairs) {
    for (const auto& up : cp.unit_pairs)
      t.rows.push_back(
          {std::to_string(id), up.treated_unit, up.control_unit, format_number(up.distance)});
    ++id;
  }
  return t;
}

MatchedSample load_sample(const std::string& cluster_pairs_path,
                          const std::string& unit_pairs_path, const Dataset& data) {
  CsvTable ct = read_csv(cluster_pairs_path);
  CsvTable ut = read_csv(unit_pairs_path);
  for (const char* col : {"pair_id", "treated_cluster", "control_cluster"})
    if (ct.column(col) < 0)
      throw data_error(cluster_pairs_path + ": missing column '" + std::string(col) + "'");
  for (const char* col : {"pair_id", "treated_unit", "control_unit"})
    if (ut.column(col) < 0)
      throw data_error(unit_pairs_path + ": missing column '" + std::string(col) + "'");

  MatchedSample sample;
  std::unordered_map<std::string, size_t> by_id;
  int c_id = ct.column("pair_id"), c_t = ct.column("treated_cluster"),
      c_c = ct.column("control_cluster");
  for (const auto& row : ct.rows) {
    by_id.emplace(row[c_id], sample.cluster_pairs.size());
    ClusterPair cp;
    cp.treated_cluster = row[c_t];
    cp.control_cluster = row[c_c];
    sample.cluster_pairs.push_back(std::move(cp));
  }
  int u_id = ut.column("pair_id"), u_t = ut.column("treated_unit"),
      u_c = ut.column("control_unit"), u_d = ut.column("distance");
  for (size_t r = 0; r < ut.rows.size(); ++r) {
    const auto& row = ut.rows[r];
    auto it = by_id.find(row[u_id]);
    if (it == by_id.end())
      throw data_error(unit_pairs_path + ":" + std::to_string(r + 2) +
                       ": pair_id '" + row[u_id] + "' not in " + cluster_pairs_path);
    UnitPair up;
    up.treated_unit = row[u_t];
    up.control_unit = row[u_c];
    if (u_d >= 0) up.distance = std::stod(row[u_d]);
    auto& cp = sample.cluster_pairs[it->second];
    cp.total_distance += up.distance;
    cp.unit_pairs.push_back(std::move(up));
  }
  sample.validate(data);
  return sample;
}

}  // namespace multimatch
