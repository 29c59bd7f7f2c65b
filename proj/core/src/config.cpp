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

#include "multimatch/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "multimatch/errors.hpp"

namespace multimatch {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known) throw config_error("unknown key '" + item.key() + "' in " + where);
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::string want_string(const json& j, const char* key, const std::string& where) {
  const json* v = find(j, key);
  if (!v || !v->is_string())
    throw config_error("'" + std::string(key) + "' in " + where + " must be a string");
  return v->get<std::string>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number())
    throw config_error("'" + std::string(key) + "' in " + where + " must be a number");
  return v->get<double>();
}

long integer_or(const json& j, const char* key, long fallback, const std::string& where) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer())
    throw config_error("'" + std::string(key) + "' in " + where + " must be an integer");
  return v->get<long>();
}

bool bool_or(const json& j, const char* key, bool fallback, const std::string& where) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean())
    throw config_error("'" + std::string(key) + "' in " + where + " must be a boolean");
  return v->get<bool>();
}

std::vector<std::string> string_list_or(const json& j, const char* key,
                                        const std::string& where) {
  const json* v = find(j, key);
  std::vector<std::string> out;
  if (!v) return out;
  if (!v->is_array())
    throw config_error("'" + std::string(key) + "' in " + where + " must be an array");
  for (const auto& e : *v) {
    if (!e.is_string())
      throw config_error("'" + std::string(key) + "' in " + where +
                         " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> number_list_or(const json& j, const char* key,
                                   const std::string& where) {
  const json* v = find(j, key);
  std::vector<double> out;
  if (!v) return out;
  if (!v->is_array())
    throw config_error("'" + std::string(key) + "' in " + where + " must be an array");
  for (const auto& e : *v) {
    if (!e.is_number())
      throw config_error("'" + std::string(key) + "' in " + where +
                         " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Kind parse_kind(const std::string& s, const std::string& where) {
  if (s == "continuous") return Kind::continuous;
  if (s == "nominal") return Kind::nominal;
  if (s == "binary") return Kind::binary;
  throw config_error("unknown kind '" + s + "' in " + where +
                     " (expected continuous, nominal or binary)");
}

Level parse_level(const std::string& s, const std::string& where) {
  if (s == "unit") return Level::unit;
  if (s == "cluster") return Level::cluster;
  throw config_error("unknown level '" + s + "' in " + where +
                     " (expected unit or cluster)");
}

Role parse_role(const std::string& s, const std::string& where) {
  if (s == "balance") return Role::balance;
  if (s == "distance_only") return Role::distance_only;
  if (s == "outcome") return Role::outcome;
  if (s == "ignore") return Role::ignore;
  throw config_error("unknown role '" + s + "' in " + where +
                     " (expected balance, distance_only, outcome or ignore)");
}

CovariateSchema parse_covariate(const json& j, size_t index) {
  std::string where = "covariates[" + std::to_string(index) + "]";
  if (!j.is_object()) throw config_error(where + " must be an object");
  reject_unknown(j, {"name", "kind", "level", "role", "categories", "missing"}, where);
  CovariateSchema cov;
  cov.name = want_string(j, "name", where);
  where = "covariate '" + cov.name + "'";
  cov.kind = parse_kind(want_string(j, "kind", where), where);
  cov.level = parse_level(want_string(j, "level", where), where);
  if (find(j, "role")) cov.role = parse_role(want_string(j, "role", where), where);
  cov.categories = string_list_or(j, "categories", where);
  if (const json* m = find(j, "missing")) {
    std::string s = m->is_string() ? m->get<std::string>() : "";
    if (s == "mean_impute")
      cov.missing = MissingPolicy::mean_impute_with_indicator;
    else if (s == "error")
      cov.missing = MissingPolicy::error;
    else
      throw config_error("unknown missing policy in " + where +
                         " (expected mean_impute or error)");
  }
  return cov;
}

BalanceConstraint parse_constraint(const json& j, Level level, size_t index) {
  std::string side = level == Level::unit ? "balance.unit" : "balance.cluster";
  std::string where = side + "[" + std::to_string(index) + "]";
  if (!j.is_object()) throw config_error(where + " must be an object");
  reject_unknown(j,
                 {"type", "covariate", "tolerance", "slack", "max_gap", "grid",
                  "weight_by_cluster_size"},
                 where);
  BalanceConstraint c;
  c.level = level;
  std::string type = want_string(j, "type", where);
  if (type == "mean")
    c.kind = ConstraintKind::mean;
  else if (type == "fine")
    c.kind = ConstraintKind::fine;
  else if (type == "ks")
    c.kind = ConstraintKind::ks;
  else if (type == "exact")
    c.kind = ConstraintKind::exact;
  else
    throw config_error("unknown constraint type '" + type + "' in " + where);
  c.covariate = want_string(j, "covariate", where);
  c.tolerance = number_or(j, "tolerance", c.tolerance, where);
  c.category_slack = static_cast<int>(integer_or(j, "slack", c.category_slack, where));
  c.max_gap = number_or(j, "max_gap", c.max_gap, where);
  c.grid_size = static_cast<int>(integer_or(j, "grid", c.grid_size, where));
  c.weight_by_cluster_size =
      bool_or(j, "weight_by_cluster_size", c.weight_by_cluster_size, where);
  return c;
}

}  // namespace

StudyConfig parse_study_config(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw config_error(origin + ": top level must be an object");
  reject_unknown(doc,
                 {"units", "clusters", "out", "covariates", "balance", "distance",
                  "matcher", "inference", "simulate", "seed"},
                 origin);

  StudyConfig config;
  if (find(doc, "units")) config.units_path = want_string(doc, "units", origin);
  if (find(doc, "clusters")) config.clusters_path = want_string(doc, "clusters", origin);
  if (find(doc, "out")) config.out_dir = want_string(doc, "out", origin);
  long seed = integer_or(doc, "seed", static_cast<long>(config.seed), origin);
  if (seed < 0) throw config_error("'seed' must be nonnegative");
  config.seed = static_cast<unsigned long>(seed);

  if (const json* covs = find(doc, "covariates")) {
    if (!covs->is_array()) throw config_error("'covariates' must be an array");
    for (size_t i = 0; i < covs->size(); ++i)
      config.schema.push_back(parse_covariate((*covs)[i], i));
  }

  if (const json* bal = find(doc, "balance")) {
    if (!bal->is_object()) throw config_error("'balance' must be an object");
    reject_unknown(*bal, {"unit", "cluster"}, "balance");
    if (const json* u = find(*bal, "unit")) {
      if (!u->is_array()) throw config_error("'balance.unit' must be an array");
      for (size_t i = 0; i < u->size(); ++i)
        config.balance.unit_constraints.push_back(
            parse_constraint((*u)[i], Level::unit, i));
    }
    if (const json* c = find(*bal, "cluster")) {
      if (!c->is_array()) throw config_error("'balance.cluster' must be an array");
      for (size_t i = 0; i < c->size(); ++i)
        config.balance.cluster_constraints.push_back(
            parse_constraint((*c)[i], Level::cluster, i));
    }
  }

  if (const json* dist = find(doc, "distance")) {
    if (!dist->is_object()) throw config_error("'distance' must be an object");
    reject_unknown(*dist, {"covariates", "caliper_width", "propensity_covariates"},
                   "distance");
    config.distance.covariates = string_list_or(*dist, "covariates", "distance");
    config.distance.caliper_width =
        number_or(*dist, "caliper_width", config.distance.caliper_width, "distance");
    if (config.distance.caliper_width < 0)
      throw config_error("'distance.caliper_width' must be nonnegative");
    config.distance.propensity_covariates =
        string_list_or(*dist, "propensity_covariates", "distance");
  }

  if (const json* m = find(doc, "matcher")) {
    if (!m->is_object()) throw config_error("'matcher' must be an object");
    reject_unknown(*m, {"objective", "lambda", "approximate", "time_limit_seconds",
                        "workers"},
                   "matcher");
    if (find(*m, "objective")) {
      std::string obj = want_string(*m, "objective", "matcher");
      if (obj == "max-cardinality")
        config.matcher.objective = MatchObjective::max_cardinality;
      else if (obj == "min-distance")
        config.matcher.objective = MatchObjective::min_distance;
      else
        throw config_error("unknown matcher objective '" + obj +
                           "' (expected max-cardinality or min-distance)");
    }
    config.matcher.lambda = number_or(*m, "lambda", config.matcher.lambda, "matcher");
    if (config.matcher.lambda < 0) throw config_error("'matcher.lambda' must be nonnegative");
    config.matcher.approximate =
        bool_or(*m, "approximate", config.matcher.approximate, "matcher");
    config.matcher.time_limit_seconds = number_or(
        *m, "time_limit_seconds", config.matcher.time_limit_seconds, "matcher");
    if (config.matcher.time_limit_seconds <= 0)
      throw config_error("'matcher.time_limit_seconds' must be positive");
    config.matcher.workers =
        static_cast<int>(integer_or(*m, "workers", config.matcher.workers, "matcher"));
    if (config.matcher.workers < 0)
      throw config_error("'matcher.workers' must be nonnegative");
  }

  if (const json* inf = find(doc, "inference")) {
    if (!inf->is_object()) throw config_error("'inference' must be an object");
    reject_unknown(*inf, {"weight_rule", "alpha", "deltas", "gamma_grid",
                          "exact_when_small"},
                   "inference");
    if (find(*inf, "weight_rule")) {
      std::string rule = want_string(*inf, "weight_rule", "inference");
      if (rule == "constant")
        config.inference.weight_rule = WeightRule::constant;
      else if (rule == "size-proportional")
        config.inference.weight_rule = WeightRule::size_proportional;
      else
        throw config_error("unknown weight_rule '" + rule +
                           "' (expected constant or size-proportional)");
    }
    config.inference.alpha =
        number_or(*inf, "alpha", config.inference.alpha, "inference");
    if (config.inference.alpha <= 0 || config.inference.alpha >= 1)
      throw config_error("'inference.alpha' must lie inside (0, 1)");
    config.inference.deltas = number_list_or(*inf, "deltas", "inference");
    for (double d : config.inference.deltas)
      if (d <= 0) throw config_error("'inference.deltas' entries must be positive");
    config.inference.gamma_grid = number_list_or(*inf, "gamma_grid", "inference");
    for (double g : config.inference.gamma_grid)
      if (g < 1) throw config_error("'inference.gamma_grid' entries must be at least 1");
    config.inference.exact_when_small =
        bool_or(*inf, "exact_when_small", config.inference.exact_when_small, "inference");
  }

  config.simulate.seed = config.seed;
  if (const json* sim = find(doc, "simulate")) {
    if (!sim->is_object()) throw config_error("'simulate' must be an object");
    reject_unknown(*sim,
                   {"treated_clusters", "control_clusters", "units_per_cluster",
                    "covariate_dims", "icc", "effect", "seed"},
                   "simulate");
    config.simulate.treated_clusters = static_cast<int>(integer_or(
        *sim, "treated_clusters", config.simulate.treated_clusters, "simulate"));
    config.simulate.control_clusters = static_cast<int>(integer_or(
        *sim, "control_clusters", config.simulate.control_clusters, "simulate"));
    config.simulate.units_per_cluster = static_cast<int>(integer_or(
        *sim, "units_per_cluster", config.simulate.units_per_cluster, "simulate"));
    config.simulate.covariate_dims = static_cast<int>(
        integer_or(*sim, "covariate_dims", config.simulate.covariate_dims, "simulate"));
    config.simulate.icc = number_or(*sim, "icc", config.simulate.icc, "simulate");
    config.simulate.effect = number_or(*sim, "effect", config.simulate.effect, "simulate");
    long sim_seed =
        integer_or(*sim, "seed", static_cast<long>(config.simulate.seed), "simulate");
    if (sim_seed < 0) throw config_error("'simulate.seed' must be nonnegative");
    config.simulate.seed = static_cast<unsigned long>(sim_seed);
    if (config.simulate.treated_clusters < 1 || config.simulate.control_clusters < 1 ||
        config.simulate.units_per_cluster < 1 || config.simulate.covariate_dims < 1)
      throw config_error("simulate sizes must be positive");
    if (!(config.simulate.icc >= 0.0 && config.simulate.icc < 1.0))
      throw config_error("'simulate.icc' must lie in [0, 1)");
  }
  return config;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_study_config(buffer.str(), path);
}

}  // namespace multimatch
