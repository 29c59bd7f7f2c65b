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

#include "multimatch/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "multimatch/csv.hpp"
#include "multimatch/errors.hpp"

namespace multimatch {
namespace {

const char* kMissingToken = "NA";

std::string where(const std::string& path, size_t line) {
  return path + ":" + std::to_string(line);
}

bool parse_double(const std::string& cell, double* out) {
  size_t pos = 0;
  try {
    *out = std::stod(cell, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == cell.size() && std::isfinite(*out);
}

// Shortest decimal form that parses back to the same double, so that
// save_dataset followed by load_dataset reproduces values exactly.
std::string format_exact(double value) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    double back = 0;
    if (parse_double(buf, &back) && back == value) break;
  }
  return buf;
}

int find_index(const std::vector<CovariateSchema>& schema, const std::string& name) {
  for (size_t j = 0; j < schema.size(); ++j)
    if (schema[j].name == name) return static_cast<int>(j);
  return -1;
}

void validate_schema(const std::vector<CovariateSchema>& schema) {
  std::unordered_set<std::string> seen{"unit_id", "cluster_id", "treated", "stratum"};
  int outcomes = 0;
  for (const auto& cov : schema) {
    if (cov.name.empty()) throw config_error("covariate with empty name");
    if (!seen.insert(cov.name).second)
      throw config_error("duplicate or reserved covariate name '" + cov.name + "'");
    if (cov.derived)
      throw config_error("covariate '" + cov.name +
                         "': missingness indicators are appended automatically");
    if (cov.kind == Kind::nominal) {
      if (cov.categories.empty())
        throw config_error("nominal covariate '" + cov.name + "' declares no categories");
      std::unordered_set<std::string> cats(cov.categories.begin(), cov.categories.end());
      if (cats.size() != cov.categories.size())
        throw config_error("nominal covariate '" + cov.name + "' repeats a category");
      if (cov.missing == MissingPolicy::mean_impute_with_indicator)
        throw config_error("nominal covariate '" + cov.name +
                           "' cannot be mean-imputed; declare '" +
                           std::string(kMissingToken) + "' as a category instead");
    } else if (!cov.categories.empty()) {
      throw config_error("non-nominal covariate '" + cov.name + "' declares categories");
    }
    if (cov.role == Role::outcome) {
      ++outcomes;
      if (cov.level != Level::unit)
        throw config_error("outcome covariate '" + cov.name + "' must be unit-level");
      if (cov.kind == Kind::nominal)
        throw config_error("outcome covariate '" + cov.name + "' must be numeric");
    }
  }
  if (outcomes > 1) throw config_error("more than one covariate has role outcome");
}

// Appends one binary indicator per imputable covariate, at the same level
// and with the parent's role, named "<parent>_missing". Indicators are
// appended even when no cell turns out to be missing, so the effective
// schema depends only on the declared one, not on the data.
std::vector<CovariateSchema> with_indicators(std::vector<CovariateSchema> schema) {
  std::vector<CovariateSchema> derived;
  for (const auto& cov : schema) {
    if (cov.missing != MissingPolicy::mean_impute_with_indicator) continue;
    if (cov.role == Role::outcome) continue;
    CovariateSchema ind;
    ind.name = cov.name + "_missing";
    ind.kind = Kind::binary;
    ind.level = cov.level;
    ind.role = cov.role;
    ind.missing = MissingPolicy::error;
    ind.derived = true;
    if (find_index(schema, ind.name) >= 0)
      throw config_error("covariate name '" + ind.name +
                         "' collides with a derived missingness indicator");
    derived.push_back(std::move(ind));
  }
  schema.insert(schema.end(), derived.begin(), derived.end());
  return schema;
}

std::vector<CovariateSchema> level_schema(const std::vector<CovariateSchema>& schema,
                                          Level level) {
  std::vector<CovariateSchema> out;
  for (const auto& cov : schema)
    if (cov.level == level) out.push_back(cov);
  return out;
}

// Maps each non-derived schema entry to its CSV column, requiring exactly
// the declared columns beyond the fixed identifier ones.
std::vector<int> map_columns(const CsvTable& table, const std::vector<CovariateSchema>& schema,
                             const std::vector<std::string>& fixed,
                             const std::vector<std::string>& optional,
                             const std::string& path) {
  for (const auto& name : fixed)
    if (table.column(name) < 0)
      throw data_error(path + ": missing required column '" + name + "'");
  std::unordered_set<std::string> known(fixed.begin(), fixed.end());
  known.insert(optional.begin(), optional.end());
  std::vector<int> cols(schema.size(), -1);
  for (size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].derived) continue;
    cols[j] = table.column(schema[j].name);
    if (cols[j] < 0)
      throw data_error(path + ": missing column for covariate '" + schema[j].name + "'");
    known.insert(schema[j].name);
  }
  for (const auto& name : table.header)
    if (!known.count(name)) throw data_error(path + ": unexpected column '" + name + "'");
  return cols;
}

// Parses one covariate cell. Returns true when the cell holds a value,
// false when it is missing and imputation is allowed.
bool parse_cell(const std::string& cell, const CovariateSchema& cov, const std::string& path,
                size_t line, double* out) {
  if (cell == kMissingToken) {
    if (cov.role == Role::outcome) return false;
    if (cov.missing == MissingPolicy::mean_impute_with_indicator) return false;
    if (cov.kind == Kind::nominal) {
      int idx = static_cast<int>(std::find(cov.categories.begin(), cov.categories.end(),
                                           kMissingToken) -
                                 cov.categories.begin());
      if (idx < static_cast<int>(cov.categories.size())) {
        *out = idx;
        return true;
      }
    }
    throw data_error(where(path, line) + ": missing value for covariate '" + cov.name +
                     "' whose policy forbids imputation");
  }
  switch (cov.kind) {
    case Kind::nominal: {
      auto it = std::find(cov.categories.begin(), cov.categories.end(), cell);
      if (it == cov.categories.end())
        throw data_error(where(path, line) + ": '" + cell +
                         "' is not a declared category of '" + cov.name + "'");
      *out = static_cast<double>(it - cov.categories.begin());
      return true;
    }
    case Kind::binary: {
      if (cell == "0" || cell == "1") {
        *out = (cell == "1") ? 1.0 : 0.0;
        return true;
      }
      throw data_error(where(path, line) + ": binary covariate '" + cov.name +
                       "' must be 0 or 1, got '" + cell + "'");
    }
    case Kind::continuous: {
      if (!parse_double(cell, out))
        throw data_error(where(path, line) + ": non-numeric value '" + cell +
                         "' for continuous covariate '" + cov.name + "'");
      return true;
    }
  }
  return false;
}

// Replaces flagged cells with the mean of the observed cells at the same
// level, then fills the derived indicator column. Observed values are
// never modified.
template <typename Row>
void impute_level(const std::vector<CovariateSchema>& schema, std::vector<Row*>& rows) {
  for (size_t j = 0; j < schema.size(); ++j) {
    const auto& cov = schema[j];
    if (cov.derived) {
      int parent = find_index(schema, cov.name.substr(0, cov.name.size() - 8));
      for (Row* row : rows) row->covariates[j] = row->imputed[parent] ? 1.0 : 0.0;
      continue;
    }
    if (cov.missing != MissingPolicy::mean_impute_with_indicator) continue;
    double sum = 0;
    size_t n = 0;
    for (const Row* row : rows)
      if (!row->imputed[j]) {
        sum += row->covariates[j];
        ++n;
      }
    if (n == 0) throw data_error("covariate '" + cov.name + "' has no observed values");
    double mean = sum / static_cast<double>(n);
    for (Row* row : rows)
      if (row->imputed[j]) row->covariates[j] = mean;
  }
}

double sample_variance(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

void compute_pooled(const std::vector<CovariateSchema>& schema,
                    const std::vector<std::vector<double>>& treated_cols,
                    const std::vector<std::vector<double>>& control_cols,
                    std::vector<double>* pooled, std::vector<bool>* degenerate) {
  pooled->assign(schema.size(), std::numeric_limits<double>::quiet_NaN());
  degenerate->assign(schema.size(), false);
  for (size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].kind == Kind::nominal) continue;
    double vt = sample_variance(treated_cols[j]);
    double vc = sample_variance(control_cols[j]);
    (*pooled)[j] = std::sqrt((vt + vc) / 2.0);
    (*degenerate)[j] = (vt == 0.0 && vc == 0.0);
  }
}

std::string cell_for(const CovariateSchema& cov, double value) {
  if (cov.kind == Kind::nominal) return cov.categories[static_cast<size_t>(value)];
  return format_exact(value);
}

}  // namespace

int Dataset::unit_cov_index(const std::string& name) const {
  return find_index(unit_schema, name);
}

int Dataset::cluster_cov_index(const std::string& name) const {
  return find_index(cluster_schema, name);
}

int Dataset::outcome_index() const {
  for (size_t j = 0; j < unit_schema.size(); ++j)
    if (unit_schema[j].role == Role::outcome) return static_cast<int>(j);
  return -1;
}

std::vector<const Cluster*> Dataset::treated_clusters() const {
  std::vector<const Cluster*> out;
  for (const auto& cl : clusters)
    if (cl.treated) out.push_back(&cl);
  return out;
}

std::vector<const Cluster*> Dataset::control_clusters() const {
  std::vector<const Cluster*> out;
  for (const auto& cl : clusters)
    if (!cl.treated) out.push_back(&cl);
  return out;
}

std::vector<const Unit*> Dataset::units_of(bool treated) const {
  std::vector<const Unit*> out;
  for (const auto& cl : clusters) {
    if (cl.treated != treated) continue;
    for (const auto& u : cl.units) out.push_back(&u);
  }
  return out;
}

const Cluster* Dataset::find_cluster(const std::string& id) const {
  for (const auto& cl : clusters)
    if (cl.cluster_id == id) return &cl;
  return nullptr;
}

const Unit* Dataset::find_unit(const std::string& id) const {
  for (const auto& cl : clusters)
    for (const auto& u : cl.units)
      if (u.unit_id == id) return &u;
  return nullptr;
}

size_t Dataset::n_units() const {
  size_t n = 0;
  for (const auto& cl : clusters) n += cl.units.size();
  return n;
}

Dataset load_dataset(const std::string& units_path, const std::string& clusters_path,
                     std::vector<CovariateSchema> schema) {
  validate_schema(schema);
  schema = with_indicators(std::move(schema));

  Dataset data;
  data.unit_schema = level_schema(schema, Level::unit);
  data.cluster_schema = level_schema(schema, Level::cluster);

  CsvTable ctab = read_csv(clusters_path);
  bool has_stratum_col = ctab.column("stratum") >= 0;
  std::vector<int> ccols = map_columns(ctab, data.cluster_schema, {"cluster_id", "treated"},
                                       {"stratum"}, clusters_path);
  int c_id = ctab.column("cluster_id");
  int c_tr = ctab.column("treated");
  int c_st = ctab.column("stratum");

  std::unordered_map<std::string, size_t> cluster_pos;
  for (size_t r = 0; r < ctab.rows.size(); ++r) {
    const auto& row = ctab.rows[r];
    size_t line = r + 2;
    Cluster cl;
    cl.cluster_id = row[c_id];
    if (cl.cluster_id.empty())
      throw data_error(where(clusters_path, line) + ": empty cluster_id");
    if (cluster_pos.count(cl.cluster_id))
      throw data_error(where(clusters_path, line) + ": duplicate cluster_id '" +
                       cl.cluster_id + "'");
    if (row[c_tr] == "0" || row[c_tr] == "1")
      cl.treated = (row[c_tr] == "1");
    else
      throw data_error(where(clusters_path, line) + ": treated must be 0 or 1, got '" +
                       row[c_tr] + "'");
    if (has_stratum_col && row[c_st] != kMissingToken && !row[c_st].empty()) {
      cl.stratum = row[c_st];
      cl.has_stratum = true;
    }
    cl.covariates.assign(data.cluster_schema.size(), 0.0);
    cl.imputed.assign(data.cluster_schema.size(), false);
    for (size_t j = 0; j < data.cluster_schema.size(); ++j) {
      if (data.cluster_schema[j].derived) continue;
      cl.imputed[j] = !parse_cell(row[ccols[j]], data.cluster_schema[j], clusters_path, line,
                                  &cl.covariates[j]);
    }
    cluster_pos.emplace(cl.cluster_id, data.clusters.size());
    data.clusters.push_back(std::move(cl));
  }

  CsvTable utab = read_csv(units_path);
  std::vector<int> ucols =
      map_columns(utab, data.unit_schema, {"unit_id", "cluster_id"}, {}, units_path);
  int u_id = utab.column("unit_id");
  int u_cl = utab.column("cluster_id");
  int out_j = data.outcome_index();

  std::unordered_set<std::string> unit_ids;
  for (size_t r = 0; r < utab.rows.size(); ++r) {
    const auto& row = utab.rows[r];
    size_t line = r + 2;
    Unit u;
    u.unit_id = row[u_id];
    u.cluster_id = row[u_cl];
    if (u.unit_id.empty()) throw data_error(where(units_path, line) + ": empty unit_id");
    if (!unit_ids.insert(u.unit_id).second)
      throw data_error(where(units_path, line) + ": duplicate unit_id '" + u.unit_id + "'");
    auto pos = cluster_pos.find(u.cluster_id);
    if (pos == cluster_pos.end())
      throw data_error(where(units_path, line) + ": cluster_id '" + u.cluster_id +
                       "' does not appear in " + clusters_path);
    u.covariates.assign(data.unit_schema.size(), 0.0);
    u.imputed.assign(data.unit_schema.size(), false);
    for (size_t j = 0; j < data.unit_schema.size(); ++j) {
      if (data.unit_schema[j].derived) continue;
      bool observed = parse_cell(row[ucols[j]], data.unit_schema[j], units_path, line,
                                 &u.covariates[j]);
      if (static_cast<int>(j) == out_j) {
        u.has_outcome = observed;
        u.outcome = observed ? u.covariates[j] : std::numeric_limits<double>::quiet_NaN();
        u.covariates[j] = u.outcome;
      } else {
        u.imputed[j] = !observed;
      }
    }
    data.clusters[pos->second].units.push_back(std::move(u));
  }

  int n_treated = 0, n_control = 0;
  for (const auto& cl : data.clusters) {
    if (cl.units.empty())
      throw data_error(clusters_path + ": cluster '" + cl.cluster_id + "' has no units");
    (cl.treated ? n_treated : n_control)++;
  }
  if (n_treated == 0) throw data_error(clusters_path + ": no treated clusters");
  if (n_control == 0) throw data_error(clusters_path + ": no control clusters");

  std::vector<Unit*> all_units;
  std::vector<Cluster*> all_clusters;
  for (auto& cl : data.clusters) {
    all_clusters.push_back(&cl);
    for (auto& u : cl.units) all_units.push_back(&u);
  }
  impute_level(data.unit_schema, all_units);
  impute_level(data.cluster_schema, all_clusters);

  // Pooled SDs over the full pre-match sample, by treatment arm.
  std::vector<std::vector<double>> ut(data.unit_schema.size()), uc(data.unit_schema.size());
  std::vector<std::vector<double>> ct(data.cluster_schema.size()),
      cc(data.cluster_schema.size());
  for (const auto& cl : data.clusters) {
    for (size_t j = 0; j < data.cluster_schema.size(); ++j)
      (cl.treated ? ct : cc)[j].push_back(cl.covariates[j]);
    for (const auto& u : cl.units)
      for (size_t j = 0; j < data.unit_schema.size(); ++j) {
        if (static_cast<int>(j) == out_j && !u.has_outcome) continue;
        (cl.treated ? ut : uc)[j].push_back(u.covariates[j]);
      }
  }
  compute_pooled(data.unit_schema, ut, uc, &data.unit_pooled_sd, &data.unit_degenerate);
  compute_pooled(data.cluster_schema, ct, cc, &data.cluster_pooled_sd,
                 &data.cluster_degenerate);
  return data;
}

void save_dataset(const Dataset& data, const std::string& units_path,
                  const std::string& clusters_path) {
  CsvTable ctab;
  bool any_stratum = false;
  for (const auto& cl : data.clusters) any_stratum |= cl.has_stratum;
  ctab.header = {"cluster_id", "treated"};
  if (any_stratum) ctab.header.push_back("stratum");
  for (const auto& cov : data.cluster_schema)
    if (!cov.derived) ctab.header.push_back(cov.name);
  for (const auto& cl : data.clusters) {
    std::vector<std::string> row = {cl.cluster_id, cl.treated ? "1" : "0"};
    if (any_stratum) row.push_back(cl.has_stratum ? cl.stratum : kMissingToken);
    for (size_t j = 0; j < data.cluster_schema.size(); ++j) {
      if (data.cluster_schema[j].derived) continue;
      row.push_back(cl.imputed[j] ? kMissingToken
                                  : cell_for(data.cluster_schema[j], cl.covariates[j]));
    }
    ctab.rows.push_back(std::move(row));
  }
  write_csv(ctab, clusters_path);

  CsvTable utab;
  utab.header = {"unit_id", "cluster_id"};
  for (const auto& cov : data.unit_schema)
    if (!cov.derived) utab.header.push_back(cov.name);
  int out_j = data.outcome_index();
  for (const auto& cl : data.clusters)
    for (const auto& u : cl.units) {
      std::vector<std::string> row = {u.unit_id, u.cluster_id};
      for (size_t j = 0; j < data.unit_schema.size(); ++j) {
        if (data.unit_schema[j].derived) continue;
        bool missing = (static_cast<int>(j) == out_j) ? !u.has_outcome : u.imputed[j];
        row.push_back(missing ? kMissingToken
                              : cell_for(data.unit_schema[j], u.covariates[j]));
      }
      utab.rows.push_back(std::move(row));
    }
  write_csv(utab, units_path);
}

double pooled_std(const Dataset& data, Level level, const std::string& covariate) {
  const auto& schema = (level == Level::unit) ? data.unit_schema : data.cluster_schema;
  int j = find_index(schema, covariate);
  if (j < 0) throw spec_error("unknown covariate '" + covariate + "'");
  if (schema[j].kind == Kind::nominal)
    throw spec_error("pooled SD is undefined for nominal covariate '" + covariate + "'");
  return (level == Level::unit) ? data.unit_pooled_sd[j] : data.cluster_pooled_sd[j];
}

double mean_of(const std::vector<const Unit*>& units, int cov_index) {
  if (units.empty()) throw data_error("mean over an empty unit list is undefined");
  double sum = 0;
  for (const Unit* u : units) sum += u->covariates[cov_index];
  return sum / static_cast<double>(units.size());
}

double standardized_difference(const std::vector<const Unit*>& treated,
                               const std::vector<const Unit*>& control, int cov_index,
                               double pooled) {
  if (treated.empty() || control.empty())
    throw data_error("standardized difference over an empty group is undefined");
  double diff = mean_of(treated, cov_index) - mean_of(control, cov_index);
  if (!(pooled > 0)) {
    if (diff == 0) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  }
  return diff / pooled;
}

}  // namespace multimatch
