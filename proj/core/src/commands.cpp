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

#include "multimatch/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "multimatch/balance.hpp"
#include "multimatch/errors.hpp"
#include "multimatch/sample.hpp"

namespace multimatch {
namespace {

namespace fs = std::filesystem;

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spec_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const infeasible_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

fs::path out_dir(const StudyConfig& config) {
  fs::path dir = config.out_dir.empty() ? "." : config.out_dir;
  fs::create_directories(dir);
  return dir;
}

Dataset load_data(const StudyConfig& config) {
  if (config.units_path.empty() || config.clusters_path.empty())
    throw config_error("config must name 'units' and 'clusters' files");
  return load_dataset(config.units_path, config.clusters_path, config.schema);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << text;
}

double mean_or_nan(const std::vector<const Unit*>& units, int cov_index) {
  if (units.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0;
  for (const Unit* u : units) sum += u->covariates[cov_index];
  return sum / static_cast<double>(units.size());
}

double proportion_or_nan(const std::vector<const Unit*>& units, int cov_index,
                         double category) {
  if (units.empty()) return std::numeric_limits<double>::quiet_NaN();
  double hits = 0;
  for (const Unit* u : units)
    if (u->covariates[cov_index] == category) ++hits;
  return hits / static_cast<double>(units.size());
}

// Count of numeric cluster covariates whose matched-sample standardized
// difference exceeds 0.1 (unweighted cluster means, pre-match pooled SD).
int cluster_mean_imbalances(const MatchedSample& sample, const Dataset& data) {
  auto tcl = sample.matched_clusters(data, true);
  auto ccl = sample.matched_clusters(data, false);
  if (tcl.empty() || ccl.empty()) return 0;
  int count = 0;
  for (size_t j = 0; j < data.cluster_schema.size(); ++j) {
    const auto& cov = data.cluster_schema[j];
    if (cov.kind == Kind::nominal || cov.role != Role::balance) continue;
    double mt = 0, mc = 0;
    for (const Cluster* c : tcl) mt += c->covariates[j];
    for (const Cluster* c : ccl) mc += c->covariates[j];
    mt /= static_cast<double>(tcl.size());
    mc /= static_cast<double>(ccl.size());
    double pooled = data.cluster_pooled_sd[j];
    double d = pooled > 0 ? (mt - mc) / pooled : (mt == mc ? 0.0 : std::numeric_limits<double>::infinity());
    if (std::abs(d) > 0.1) ++count;
  }
  return count;
}

double unit_tv(const MatchedSample& sample, const Dataset& data) {
  std::vector<int> nominal;
  for (size_t j = 0; j < data.unit_schema.size(); ++j)
    if (data.unit_schema[j].kind == Kind::nominal &&
        data.unit_schema[j].role == Role::balance)
      nominal.push_back(static_cast<int>(j));
  if (nominal.empty()) return 0.0;
  auto tu = sample.matched_units(data, true);
  auto cu = sample.matched_units(data, false);
  if (tu.empty() || cu.empty()) return 0.0;
  return total_variation_distance(tu, cu, nominal, data.unit_schema);
}

nlohmann::json run_summary(const StudyConfig& config, const MatchRun& run,
                           const BalanceReport* report) {
  size_t unit_pairs = 0;
  int below = 0;
  for (const auto& cp : run.sample.cluster_pairs) {
    unit_pairs += cp.unit_pairs.size();
    if (cp.below_optimal) ++below;
  }
  nlohmann::json j;
  j["strategy"] = strategy_name(run.sample.provenance);
  j["objective"] = config.matcher.objective == MatchObjective::max_cardinality
                       ? "max-cardinality"
                       : "min-distance";
  j["lambda"] = config.matcher.lambda;
  j["approximate"] = config.matcher.approximate;
  j["workers"] = config.matcher.workers;
  j["cluster_pairs"] = run.sample.cluster_pairs.size();
  j["unit_pairs"] = unit_pairs;
  j["total_distance"] = run.sample.total_distance();
  j["subproblems_solved"] = run.subproblems_solved;
  j["below_optimal_pairs"] = below;
  j["timing"] = {{"pair_table_seconds", run.pair_table_seconds},
                 {"cluster_stage_seconds", run.cluster_stage_seconds}};
  if (report) j["balance_violations"] = report->violations;
  if (!run.infeasibility.empty()) j["infeasibility"] = run.infeasibility;
  return j;
}

struct CompareRow {
  std::string method;
  MatchRun run;
};

void append_comparison(CsvTable* table, const CompareRow& row, const Dataset& data) {
  size_t unit_pairs = 0;
  for (const auto& cp : row.run.sample.cluster_pairs) unit_pairs += cp.unit_pairs.size();
  double minutes = (row.run.pair_table_seconds + row.run.cluster_stage_seconds) / 60.0;
  table->rows.push_back({
      row.method,
      std::to_string(row.run.sample.cluster_pairs.size()),
      std::to_string(2 * unit_pairs),
      std::to_string(cluster_mean_imbalances(row.run.sample, data)),
      format_number(unit_tv(row.run.sample, data)),
      std::to_string(row.run.subproblems_solved),
      format_number(minutes, 4),
  });
}

MatchedSample load_out_sample(const StudyConfig& config, const Dataset& data) {
  fs::path dir = config.out_dir.empty() ? "." : config.out_dir;
  return load_sample((dir / "cluster_pairs.csv").string(),
                     (dir / "unit_pairs.csv").string(), data);
}

}  // namespace

int cmd_match(const StudyConfig& config) {
  return guarded([&] {
    Dataset data = load_data(config);
    validate_spec(config.balance, data);
    fs::path dir = out_dir(config);
    MatchRun run = multilevel_match(data, config.balance, config.distance, config.matcher);
    write_csv(cluster_pairs_csv(run.sample), (dir / "cluster_pairs.csv").string());
    write_csv(unit_pairs_csv(run.sample), (dir / "unit_pairs.csv").string());
    if (run.sample.cluster_pairs.empty()) {
      write_text(dir / "run_summary.json", run_summary(config, run, nullptr).dump(2) + "\n");
      for (const auto& line : run.infeasibility) std::cerr << "infeasible: " << line << "\n";
      return 4;
    }
    BalanceReport report = balance_report(run.sample, data, config.balance);
    write_csv(balance_report_csv(report), (dir / "balance_report.csv").string());
    write_text(dir / "run_summary.json", run_summary(config, run, &report).dump(2) + "\n");
    return 0;
  });
}

int cmd_compare(const StudyConfig& config) {
  return guarded([&] {
    Dataset data = load_data(config);
    validate_spec(config.balance, data);
    fs::path dir = out_dir(config);
    std::vector<CompareRow> rows;
    rows.push_back({"myopic-optimal", myopic_match(data, config.balance, config.distance,
                                                   config.matcher, MyopicMode::optimal)});
    rows.push_back({"myopic-cardinality",
                    myopic_match(data, config.balance, config.distance, config.matcher,
                                 MyopicMode::cardinality)});
    rows.push_back({"dynamic", multilevel_match(data, config.balance, config.distance,
                                                config.matcher)});
    CsvTable table;
    table.header = {"method",      "schools",          "students",
                    "mean_imbalances_school", "tv_students", "problems_solved",
                    "time_minutes"};
    for (const auto& row : rows) append_comparison(&table, row, data);
    write_csv(table, (dir / "comparison.csv").string());
    return 0;
  });
}

int cmd_analyze(const StudyConfig& config) {
  return guarded([&] {
    Dataset data = load_data(config);
    fs::path dir = out_dir(config);
    MatchedSample sample = load_out_sample(config, data);
    InferenceResult result = analyze_sample(sample, data, config.inference);
    write_text(dir / "inference_report.json", inference_json(result));
    write_text(dir / "inference_report.txt", inference_text(result));
    write_csv(gamma_sweep_csv(result), (dir / "gamma_sweep.csv").string());
    return 0;
  });
}

int cmd_balance(const StudyConfig& config) {
  return guarded([&] {
    Dataset data = load_data(config);
    validate_spec(config.balance, data);
    fs::path dir = out_dir(config);
    MatchedSample sample = load_out_sample(config, data);

    auto matched_t = sample.matched_units(data, true);
    auto matched_c = sample.matched_units(data, false);
    auto all_t = data.units_of(true);
    auto all_c = data.units_of(false);
    auto unmatched = [](const std::vector<const Unit*>& all,
                        const std::vector<const Unit*>& matched) {
      std::vector<const Unit*> rest;
      for (const Unit* u : all)
        if (std::find(matched.begin(), matched.end(), u) == matched.end())
          rest.push_back(u);
      return rest;
    };
    auto unmatched_t = unmatched(all_t, matched_t);
    auto unmatched_c = unmatched(all_c, matched_c);

    CsvTable mean_table;
    mean_table.header = {"covariate", "mean_treated", "mean_control", "std_diff"};
    for (size_t j = 0; j < data.unit_schema.size(); ++j) {
      const auto& cov = data.unit_schema[j];
      if (cov.kind == Kind::nominal) continue;
      if (cov.role != Role::balance && cov.role != Role::distance_only) continue;
      double mt = mean_or_nan(matched_t, static_cast<int>(j));
      double mc = mean_or_nan(matched_c, static_cast<int>(j));
      double pooled = data.unit_pooled_sd[j];
      double sd = pooled > 0 ? (mt - mc) / pooled : 0.0;
      mean_table.rows.push_back(
          {cov.name, format_number(mt), format_number(mc), format_number(sd, 4)});
    }
    write_csv(mean_table, (dir / "unit_mean_balance.csv").string());

    CsvTable fine_table;
    fine_table.header = {"covariate", "category", "count_treated", "count_control"};
    for (size_t j = 0; j < data.unit_schema.size(); ++j) {
      const auto& cov = data.unit_schema[j];
      if (cov.kind != Kind::nominal || cov.role != Role::balance) continue;
      for (size_t cat = 0; cat < cov.categories.size(); ++cat) {
        long ct = 0, cc = 0;
        for (const Unit* u : matched_t)
          if (u->covariates[j] == static_cast<double>(cat)) ++ct;
        for (const Unit* u : matched_c)
          if (u->covariates[j] == static_cast<double>(cat)) ++cc;
        fine_table.rows.push_back({cov.name, cov.categories[cat], std::to_string(ct),
                                   std::to_string(cc)});
      }
    }
    write_csv(fine_table, (dir / "unit_fine_balance.csv").string());

    CsvTable cluster_table;
    cluster_table.header = {"covariate", "weighted", "mean_treated", "mean_control",
                            "std_diff"};
    auto tcl = sample.matched_clusters(data, true);
    auto ccl = sample.matched_clusters(data, false);
    auto cluster_mean = [](const std::vector<const Cluster*>& cls, size_t j,
                           bool weighted) {
      if (cls.empty()) return std::numeric_limits<double>::quiet_NaN();
      double num = 0, den = 0;
      for (const Cluster* c : cls) {
        double w = weighted ? static_cast<double>(c->units.size()) : 1.0;
        num += w * c->covariates[j];
        den += w;
      }
      return num / den;
    };
    for (size_t j = 0; j < data.cluster_schema.size(); ++j) {
      const auto& cov = data.cluster_schema[j];
      if (cov.kind == Kind::nominal) continue;
      if (cov.role != Role::balance && cov.role != Role::distance_only) continue;
      for (bool weighted : {false, true}) {
        double mt = cluster_mean(tcl, j, weighted);
        double mc = cluster_mean(ccl, j, weighted);
        double pooled = data.cluster_pooled_sd[j];
        double sd = pooled > 0 ? (mt - mc) / pooled : 0.0;
        cluster_table.rows.push_back({cov.name, weighted ? "yes" : "no",
                                      format_number(mt), format_number(mc),
                                      format_number(sd, 4)});
      }
    }
    write_csv(cluster_table, (dir / "cluster_mean_balance.csv").string());

    CsvTable desc;
    desc.header = {"covariate",       "treated_all",       "treated_unmatched",
                   "treated_matched", "control_matched",   "control_unmatched",
                   "control_all"};
    auto desc_row = [&](const std::string& name, auto value) {
      desc.rows.push_back({name, format_number(value(all_t)),
                           format_number(value(unmatched_t)),
                           format_number(value(matched_t)),
                           format_number(value(matched_c)),
                           format_number(value(unmatched_c)),
                           format_number(value(all_c))});
    };
    for (size_t j = 0; j < data.unit_schema.size(); ++j) {
      const auto& cov = data.unit_schema[j];
      if (cov.role == Role::outcome || cov.role == Role::ignore) continue;
      if (cov.kind == Kind::nominal) {
        for (size_t cat = 0; cat < cov.categories.size(); ++cat)
          desc_row(cov.name + ": " + cov.categories[cat],
                   [&](const std::vector<const Unit*>& units) {
                     return proportion_or_nan(units, static_cast<int>(j),
                                              static_cast<double>(cat));
                   });
      } else {
        desc_row(cov.name, [&](const std::vector<const Unit*>& units) {
          return mean_or_nan(units, static_cast<int>(j));
        });
      }
    }
    write_csv(desc, (dir / "sample_description.csv").string());
    return 0;
  });
}

int cmd_simulate(const StudyConfig& config) {
  return guarded([&] {
    SimulatedStudy study = simulate_study(config.simulate);
    fs::path dir = out_dir(config);
    write_csv(study.units, (dir / "units.csv").string());
    write_csv(study.clusters, (dir / "clusters.csv").string());
    return 0;
  });
}

}  // namespace multimatch
