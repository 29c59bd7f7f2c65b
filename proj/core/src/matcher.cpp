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

#include "multimatch/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_map>

#include "multimatch/errors.hpp"

namespace multimatch {
namespace {

constexpr double kTieEps = 1e-9;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Canonical views shared by the pair table, the cluster stage and the
// myopic baselines: cluster lists in load order, unit lists concatenated
// per cluster with [begin, end) ranges.
struct Indexed {
  std::vector<const Cluster*> tcl, ccl;
  std::vector<const Unit*> tu, cu;
  std::vector<std::pair<size_t, size_t>> trange, crange;
};

Indexed index_dataset(const Dataset& data) {
  Indexed ix;
  ix.tcl = data.treated_clusters();
  ix.ccl = data.control_clusters();
  for (const Cluster* cl : ix.tcl) {
    size_t begin = ix.tu.size();
    for (const auto& u : cl->units) ix.tu.push_back(&u);
    ix.trange.emplace_back(begin, ix.tu.size());
  }
  for (const Cluster* cl : ix.ccl) {
    size_t begin = ix.cu.size();
    for (const auto& u : cl->units) ix.cu.push_back(&u);
    ix.crange.emplace_back(begin, ix.cu.size());
  }
  return ix;
}

std::vector<int> resolve_unit_covariates(const Dataset& data,
                                         const std::vector<std::string>& names) {
  std::vector<int> out;
  if (names.empty()) {
    for (size_t j = 0; j < data.unit_schema.size(); ++j) {
      const auto& cov = data.unit_schema[j];
      if (cov.kind == Kind::nominal) continue;
      if (cov.role == Role::balance || cov.role == Role::distance_only)
        out.push_back(static_cast<int>(j));
    }
    return out;
  }
  for (const auto& name : names) {
    int j = data.unit_cov_index(name);
    if (j < 0) throw spec_error("distance covariate '" + name + "' is not a unit covariate");
    if (data.unit_schema[j].kind == Kind::nominal)
      throw spec_error("distance covariate '" + name + "' is nominal; use indicators");
    out.push_back(j);
  }
  return out;
}

std::vector<int> numeric_cluster_covariates(const Dataset& data) {
  std::vector<int> out;
  for (size_t j = 0; j < data.cluster_schema.size(); ++j) {
    const auto& cov = data.cluster_schema[j];
    if (cov.kind == Kind::nominal) continue;
    if (cov.role == Role::balance || cov.role == Role::distance_only)
      out.push_back(static_cast<int>(j));
  }
  return out;
}

// Global treated-by-control unit distances, with the optional propensity
// caliper already applied. Per-pair subproblems slice this one matrix so
// ranks are taken over the full pooled sample exactly once.
DistanceMatrix unit_distance_matrix(const Dataset& data, const DistanceConfig& dconfig,
                                    const Indexed& ix) {
  std::vector<int> covs = resolve_unit_covariates(data, dconfig.covariates);
  DistanceMatrix m = robust_mahalanobis(ix.tu, ix.cu, covs);
  if (dconfig.caliper_width > 0) {
    std::vector<int> pcovs =
        dconfig.propensity_covariates.empty()
            ? covs
            : resolve_unit_covariates(data, dconfig.propensity_covariates);
    PropensityScores prop = estimate_propensity(data, Level::unit, pcovs);
    std::unordered_map<const Unit*, double> score;
    size_t i = 0;
    for (const auto& cl : data.clusters)
      for (const auto& u : cl.units) score[&u] = prop.values[i++];
    std::vector<double> rs, cs;
    for (const Unit* u : ix.tu) rs.push_back(score[u]);
    for (const Unit* u : ix.cu) cs.push_back(score[u]);
    m = apply_caliper(std::move(m), rs, cs, dconfig.caliper_width, prop.sd);
  }
  return m;
}

DistanceMatrix cluster_distance_matrix(const Dataset& data, const DistanceConfig& dconfig,
                                       const Indexed& ix) {
  std::vector<int> covs = numeric_cluster_covariates(data);
  DistanceMatrix m = robust_mahalanobis_clusters(ix.tcl, ix.ccl, covs);
  if (dconfig.caliper_width > 0 && !covs.empty()) {
    PropensityScores prop = estimate_propensity(data, Level::cluster, covs);
    std::vector<double> rs, cs;
    size_t i = 0;
    for (const auto& cl : data.clusters) {
      (cl.treated ? rs : cs).push_back(prop.values[i]);
      ++i;
    }
    m = apply_caliper(std::move(m), rs, cs, dconfig.caliper_width, prop.sd);
  }
  return m;
}

DistanceMatrix slice(const DistanceMatrix& global, size_t rb, size_t re, size_t cb,
                     size_t ce) {
  DistanceMatrix out;
  out.row_ids.assign(global.row_ids.begin() + rb, global.row_ids.begin() + re);
  out.col_ids.assign(global.col_ids.begin() + cb, global.col_ids.begin() + ce);
  out.d.reserve((re - rb) * (ce - cb));
  for (size_t r = rb; r < re; ++r)
    for (size_t c = cb; c < ce; ++c) out.d.push_back(global.at(r, c));
  return out;
}

std::vector<std::pair<int, int>> all_edges(size_t nt, size_t nc) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(nt * nc);
  for (size_t i = 0; i < nt; ++i)
    for (size_t j = 0; j < nc; ++j)
      edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return edges;
}

std::vector<std::pair<int, int>> selected_edges(
    const std::vector<std::pair<int, int>>& edges, const std::vector<double>& values) {
  std::vector<std::pair<int, int>> out;
  for (size_t e = 0; e < edges.size(); ++e)
    if (values[e] > 0.5) out.push_back(edges[e]);
  return out;
}

// True when the pair violates an exact cluster constraint; such entries
// are never solved.
bool cross_stratum(const BalanceSpec& spec, const Dataset& data, const Cluster& t,
                   const Cluster& c) {
  for (const auto& con : spec.cluster_constraints) {
    if (con.kind != ConstraintKind::exact) continue;
    if (con.covariate == "stratum") {
      if ((t.has_stratum ? t.stratum : "") != (c.has_stratum ? c.stratum : "")) return true;
      continue;
    }
    int j = data.cluster_cov_index(con.covariate);
    if (t.covariates[j] != c.covariates[j]) return true;
  }
  return false;
}

double edge_distance(const DistanceMatrix& d, const std::pair<int, int>& e) {
  return d.at(static_cast<size_t>(e.first), static_cast<size_t>(e.second));
}

UnitMatchResult materialize_units(const std::vector<std::pair<int, int>>& edges,
                                  const std::vector<double>& values,
                                  const DistanceMatrix& distances) {
  UnitMatchResult res;
  res.pairing = selected_edges(edges, values);
  res.m = static_cast<int>(res.pairing.size());
  for (const auto& e : res.pairing) res.total_distance += edge_distance(distances, e);
  return res;
}

}  // namespace

UnitMatchResult cardinality_match_units(const std::vector<const Unit*>& treated,
                                        const std::vector<const Unit*>& control,
                                        const BalanceSpec& spec, const Dataset& data,
                                        const DistanceMatrix& distances,
                                        const SolveOptions& options, bool approximate) {
  UnitMatchResult res;
  if (treated.empty() || control.empty()) return res;
  auto edges = all_edges(treated.size(), control.size());
  EdgeConstraintSet set = build_unit_constraints(spec, data, treated, control, edges);

  IntegerProgram ip;
  ip.n_vars = static_cast<int>(edges.size());
  ip.objective.assign(edges.size(), 1.0);
  ip.constraints = set.rows;

  if (approximate) {
    Solution s = relax_and_round(ip);
    if (s.values.empty()) return res;
    res = materialize_units(edges, s.values, distances);
    res.below_optimal = s.bound_gap > kTieEps;
    return res;
  }

  Solution first = solve_ip(ip, options);
  if (first.values.empty()) {
    res.below_optimal = first.status == SolveStatus::infeasible_unproven;
    return res;
  }
  res.below_optimal = first.status != SolveStatus::optimal;
  int m = static_cast<int>(std::llround(first.objective_value));
  if (m == 0) return res;

  // Among the maximum-cardinality matchings, take the cheapest: same rows,
  // distance objective, cardinality pinned.
  IntegerProgram tie = ip;
  tie.objective.clear();
  for (const auto& e : edges) tie.objective.push_back(-edge_distance(distances, e));
  LinearConstraint pin;
  for (size_t e = 0; e < edges.size(); ++e) pin.terms.emplace_back(static_cast<int>(e), 1.0);
  pin.rel = Relation::eq;
  pin.rhs = m;
  pin.name = "cardinality pin";
  tie.add(std::move(pin));
  Solution second = solve_ip(tie, options);
  if (second.values.empty()) {
    res = materialize_units(edges, first.values, distances);
    res.below_optimal = true;
    return res;
  }
  bool below = res.below_optimal || second.status != SolveStatus::optimal;
  res = materialize_units(edges, second.values, distances);
  res.below_optimal = below;
  return res;
}

UnitMatchResult min_distance_match_units(const std::vector<const Unit*>& treated,
                                         const std::vector<const Unit*>& control,
                                         const BalanceSpec& spec, const Dataset& data,
                                         const DistanceMatrix& distances, int required,
                                         const SolveOptions& options) {
  UnitMatchResult res;
  if (treated.empty() || control.empty() || required <= 0) return res;
  auto edges = all_edges(treated.size(), control.size());
  EdgeConstraintSet set = build_unit_constraints(spec, data, treated, control, edges);

  IntegerProgram ip;
  ip.n_vars = static_cast<int>(edges.size());
  for (const auto& e : edges) ip.objective.push_back(-edge_distance(distances, e));
  ip.constraints = set.rows;
  LinearConstraint pin;
  for (size_t e = 0; e < edges.size(); ++e) pin.terms.emplace_back(static_cast<int>(e), 1.0);
  pin.rel = Relation::eq;
  pin.rhs = required;
  pin.name = "required pair count";
  ip.add(std::move(pin));

  Solution s = solve_ip(ip, options);
  if (s.values.empty()) {
    res.below_optimal = s.status == SolveStatus::infeasible_unproven;
    return res;
  }
  res = materialize_units(edges, s.values, distances);
  res.below_optimal = s.status != SolveStatus::optimal;
  return res;
}

PairTable compute_pair_table(const Dataset& data, const BalanceSpec& spec,
                             const DistanceConfig& dconfig, const MatcherOptions& options) {
  validate_spec(spec, data);
  Indexed ix = index_dataset(data);
  DistanceMatrix global = unit_distance_matrix(data, dconfig, ix);

  PairTable table;
  table.kt = ix.tcl.size();
  table.kc = ix.ccl.size();
  size_t cells = table.kt * table.kc;
  table.m.assign(cells, 0);
  table.dist.assign(cells, 0.0);
  table.pairing.assign(cells, {});
  table.below_optimal.assign(cells, 0);
  table.skipped.assign(cells, 0);

  for (size_t t = 0; t < table.kt; ++t)
    for (size_t c = 0; c < table.kc; ++c)
      if (cross_stratum(spec, data, *ix.tcl[t], *ix.ccl[c]))
        table.skipped[table.idx(t, c)] = 1;

  SolveOptions solve_opts;
  solve_opts.time_limit_seconds = options.time_limit_seconds;

  std::atomic<size_t> next{0};
  std::atomic<long> solved{0};
  auto worker = [&] {
    for (;;) {
      size_t cell = next.fetch_add(1);
      if (cell >= cells) return;
      if (table.skipped[cell]) continue;
      size_t t = cell / table.kc, c = cell % table.kc;
      auto [tb, te] = ix.trange[t];
      auto [cb, ce] = ix.crange[c];
      std::vector<const Unit*> tu(ix.tu.begin() + tb, ix.tu.begin() + te);
      std::vector<const Unit*> cu(ix.cu.begin() + cb, ix.cu.begin() + ce);
      DistanceMatrix local = slice(global, tb, te, cb, ce);
      UnitMatchResult r;
      if (options.objective == MatchObjective::max_cardinality)
        r = cardinality_match_units(tu, cu, spec, data, local, solve_opts,
                                    options.approximate);
      else
        r = min_distance_match_units(tu, cu, spec, data, local,
                                     static_cast<int>(std::min(tu.size(), cu.size())),
                                     solve_opts);
      table.m[cell] = r.m;
      table.dist[cell] = r.total_distance;
      table.pairing[cell] = std::move(r.pairing);
      table.below_optimal[cell] = r.below_optimal ? 1 : 0;
      solved.fetch_add(1);
    }
  };

  unsigned n_workers = options.workers > 0
                           ? static_cast<unsigned>(options.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, std::max<size_t>(cells, 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  table.solved_subproblems = solved.load();
  return table;
}

ClusterMatchResult cluster_match(const PairTable& table, const BalanceSpec& spec,
                                 const Dataset& data, double lambda,
                                 MatchObjective objective, const SolveOptions& options) {
  Indexed ix = index_dataset(data);
  ClusterMatchResult res;

  // An m = 0 pair can still loosen a count-scaled cluster row (its cluster
  // covariates enter the sums), so it stays a candidate whenever such rows
  // exist; it is dropped only when provably useless.
  bool sum_rows = false;
  for (const auto& con : spec.cluster_constraints)
    if (con.kind != ConstraintKind::exact) sum_rows = true;

  std::vector<std::pair<int, int>> edges;
  for (size_t t = 0; t < table.kt; ++t)
    for (size_t c = 0; c < table.kc; ++c) {
      size_t cell = table.idx(t, c);
      if (table.skipped[cell]) continue;
      if (table.m[cell] == 0) {
        if (objective == MatchObjective::min_distance) continue;  // pair infeasible
        if (lambda <= 0 && !sum_rows) continue;
      }
      edges.emplace_back(static_cast<int>(t), static_cast<int>(c));
    }

  auto report_infeasible = [&] {
    for (const auto& e : edges) {
      size_t cell = table.idx(e.first, e.second);
      if (table.m[cell] == 0) continue;
      EdgeConstraintSet single = build_cluster_constraints(
          spec, data, {ix.tcl[e.first]}, {ix.ccl[e.second]}, {{0, 0}});
      std::vector<double> x{1.0};
      std::string names;
      for (const auto& row : single.rows)
        if (!row.satisfied(x)) names += (names.empty() ? "" : ", ") + row.name;
      if (!names.empty())
        res.infeasibility.push_back("pair (" + ix.tcl[e.first]->cluster_id + ", " +
                                    ix.ccl[e.second]->cluster_id + "): violates " + names);
    }
    if (res.infeasibility.empty())
      res.infeasibility.push_back(
          "no candidate cluster pair admits matched units under the constraints");
  };

  if (edges.empty()) {
    report_infeasible();
    return res;
  }

  EdgeConstraintSet set = build_cluster_constraints(spec, data, ix.tcl, ix.ccl, edges);
  IntegerProgram ip;
  ip.n_vars = static_cast<int>(edges.size());
  for (const auto& e : edges)
    ip.objective.push_back(static_cast<double>(table.m[table.idx(e.first, e.second)]) +
                           lambda);
  ip.constraints = set.rows;

  Solution first = solve_ip(ip, options);
  if (first.values.empty() || first.objective_value <= kTieEps) {
    report_infeasible();
    return res;
  }
  res.below_optimal = first.status != SolveStatus::optimal;

  IntegerProgram tie = ip;
  tie.objective.clear();
  for (const auto& e : edges)
    tie.objective.push_back(-table.dist[table.idx(e.first, e.second)]);
  LinearConstraint pin;
  pin.terms.reserve(edges.size());
  for (size_t e = 0; e < edges.size(); ++e)
    pin.terms.emplace_back(static_cast<int>(e), ip.objective[e]);
  pin.rel = Relation::eq;
  pin.rhs = first.objective_value;
  pin.name = "cardinality pin";
  tie.add(std::move(pin));
  Solution second = solve_ip(tie, options);

  const Solution* use = &first;
  if (!second.values.empty()) {
    use = &second;
    res.below_optimal = res.below_optimal || second.status != SolveStatus::optimal;
  } else {
    res.below_optimal = true;
  }
  res.assignment = selected_edges(edges, use->values);
  for (const auto& e : res.assignment) {
    res.total_m += table.m[table.idx(e.first, e.second)];
    res.total_distance += table.dist[table.idx(e.first, e.second)];
  }
  return res;
}

namespace {

MatchRun materialize(const Indexed& ix, const PairTable& table,
                     const ClusterMatchResult& cm, Strategy provenance) {
  MatchRun run;
  run.sample.provenance = provenance;
  run.infeasibility = cm.infeasibility;
  for (const auto& [t, c] : cm.assignment) {
    size_t cell = table.idx(t, c);
    ClusterPair cp;
    cp.treated_cluster = ix.tcl[t]->cluster_id;
    cp.control_cluster = ix.ccl[c]->cluster_id;
    cp.total_distance = table.dist[cell];
    cp.below_optimal = table.below_optimal[cell] != 0 || cm.below_optimal;
    auto [tb, te] = ix.trange[t];
    auto [cb, ce] = ix.crange[c];
    (void)te;
    (void)ce;
    for (const auto& [i, j] : table.pairing[cell]) {
      UnitPair up;
      up.treated_unit = ix.tu[tb + i]->unit_id;
      up.control_unit = ix.cu[cb + j]->unit_id;
      cp.unit_pairs.push_back(std::move(up));
    }
    run.sample.cluster_pairs.push_back(std::move(cp));
  }
  return run;
}

// Per-pair unit distances are recovered for reporting from the same global
// matrix the solves used.
void fill_unit_distances(MatchRun* run, const Indexed& ix, const DistanceMatrix& global) {
  std::unordered_map<std::string, size_t> trow, ccol;
  for (size_t i = 0; i < ix.tu.size(); ++i) trow[ix.tu[i]->unit_id] = i;
  for (size_t j = 0; j < ix.cu.size(); ++j) ccol[ix.cu[j]->unit_id] = j;
  for (auto& cp : run->sample.cluster_pairs)
    for (auto& up : cp.unit_pairs)
      up.distance = global.at(trow[up.treated_unit], ccol[up.control_unit]);
}

}  // namespace

MatchRun multilevel_match(const Dataset& data, const BalanceSpec& spec,
                          const DistanceConfig& dconfig, const MatcherOptions& options) {
  Indexed ix = index_dataset(data);
  double t0 = now_seconds();
  PairTable table = compute_pair_table(data, spec, dconfig, options);
  double t1 = now_seconds();
  SolveOptions cluster_opts;
  cluster_opts.time_limit_seconds = std::max(60.0, options.time_limit_seconds);
  ClusterMatchResult cm =
      cluster_match(table, spec, data, options.lambda, options.objective, cluster_opts);
  double t2 = now_seconds();

  MatchRun run = materialize(ix, table, cm, Strategy::dynamic);
  fill_unit_distances(&run, ix, unit_distance_matrix(data, dconfig, ix));
  run.subproblems_solved = table.solved_subproblems + 1;
  run.pair_table_seconds = t1 - t0;
  run.cluster_stage_seconds = t2 - t1;
  return run;
}

MatchRun myopic_match(const Dataset& data, const BalanceSpec& spec,
                      const DistanceConfig& dconfig, const MatcherOptions& options,
                      MyopicMode mode) {
  validate_spec(spec, data);
  Indexed ix = index_dataset(data);
  DistanceMatrix unit_global = unit_distance_matrix(data, dconfig, ix);
  DistanceMatrix cluster_dist = cluster_distance_matrix(data, dconfig, ix);
  double t0 = now_seconds();

  std::vector<std::pair<int, int>> chosen;
  long subproblems = 0;
  bool below = false;
  std::vector<std::string> infeasibility;

  if (mode == MyopicMode::optimal) {
    AssignmentResult ar = min_distance_assignment(cluster_dist);
    chosen = ar.pairs;
    ++subproblems;
  } else {
    auto edges = all_edges(ix.tcl.size(), ix.ccl.size());
    EdgeConstraintSet set = build_cluster_constraints(spec, data, ix.tcl, ix.ccl, edges);
    IntegerProgram ip;
    ip.n_vars = static_cast<int>(edges.size());
    ip.objective.assign(edges.size(), 1.0);
    ip.constraints = set.rows;
    SolveOptions opts;
    opts.time_limit_seconds = std::max(60.0, options.time_limit_seconds);
    Solution first = solve_ip(ip, opts);
    ++subproblems;
    if (first.values.empty() || first.objective_value <= kTieEps) {
      infeasibility.push_back("no cluster pair satisfies the cluster constraints");
    } else {
      below = first.status != SolveStatus::optimal;
      IntegerProgram tie = ip;
      tie.objective.clear();
      for (const auto& e : edges) tie.objective.push_back(-edge_distance(cluster_dist, e));
      LinearConstraint pin;
      for (size_t e = 0; e < edges.size(); ++e)
        pin.terms.emplace_back(static_cast<int>(e), 1.0);
      pin.rel = Relation::eq;
      pin.rhs = first.objective_value;
      pin.name = "pair count pin";
      tie.add(std::move(pin));
      Solution second = solve_ip(tie, opts);
      chosen = selected_edges(edges, second.values.empty() ? first.values : second.values);
      below = below || second.values.empty() || second.status != SolveStatus::optimal;
    }
  }
  double t1 = now_seconds();

  MatchRun run;
  run.sample.provenance =
      mode == MyopicMode::optimal ? Strategy::myopic_optimal : Strategy::myopic_cardinality;
  run.infeasibility = std::move(infeasibility);
  SolveOptions unit_opts;
  unit_opts.time_limit_seconds = options.time_limit_seconds;
  for (const auto& [t, c] : chosen) {
    auto [tb, te] = ix.trange[t];
    auto [cb, ce] = ix.crange[c];
    std::vector<const Unit*> tu(ix.tu.begin() + tb, ix.tu.begin() + te);
    std::vector<const Unit*> cu(ix.cu.begin() + cb, ix.cu.begin() + ce);
    DistanceMatrix local = slice(unit_global, tb, te, cb, ce);
    ClusterPair cp;
    cp.treated_cluster = ix.tcl[t]->cluster_id;
    cp.control_cluster = ix.ccl[c]->cluster_id;
    if (mode == MyopicMode::optimal) {
      AssignmentResult ar = min_distance_assignment(local);
      for (const auto& [i, j] : ar.pairs) {
        UnitPair up;
        up.treated_unit = tu[i]->unit_id;
        up.control_unit = cu[j]->unit_id;
        up.distance = local.at(i, j);
        cp.total_distance += up.distance;
        cp.unit_pairs.push_back(std::move(up));
      }
    } else {
      UnitMatchResult r = cardinality_match_units(tu, cu, spec, data, local, unit_opts,
                                                  options.approximate);
      cp.below_optimal = r.below_optimal;
      below = below || r.below_optimal;
      for (const auto& [i, j] : r.pairing) {
        UnitPair up;
        up.treated_unit = tu[i]->unit_id;
        up.control_unit = cu[j]->unit_id;
        up.distance = local.at(i, j);
        cp.total_distance += up.distance;
        cp.unit_pairs.push_back(std::move(up));
      }
    }
    ++subproblems;
    run.sample.cluster_pairs.push_back(std::move(cp));
  }
  run.subproblems_solved = subproblems;
  run.pair_table_seconds = t1 - t0;
  run.cluster_stage_seconds = now_seconds() - t1;
  if (below)
    for (auto& cp : run.sample.cluster_pairs) cp.below_optimal = true;
  return run;
}

AssignmentResult min_distance_assignment(const DistanceMatrix& distances) {
  AssignmentResult res;
  size_t nr = distances.rows(), nc = distances.cols();
  if (nr == 0 || nc == 0) return res;
  bool transposed = nr > nc;
  size_t R = transposed ? nc : nr;
  size_t C = transposed ? nr : nc;
  auto cost_at = [&](size_t i, size_t j) {
    return transposed ? distances.at(j, i) : distances.at(i, j);
  };

  // Rows with no finite edge cannot be matched at all; everything else is
  // handled with a big-M on the forbidden edges, which makes the optimum
  // lexicographic: maximum matched rows first, then minimum cost.
  double big = 1.0;
  for (double v : distances.d)
    if (std::isfinite(v)) big += std::abs(v);
  std::vector<char> row_dead(R, 1);
  for (size_t i = 0; i < R; ++i)
    for (size_t j = 0; j < C && row_dead[i]; ++j)
      if (std::isfinite(cost_at(i, j))) row_dead[i] = 0;

  // Shortest augmenting paths with potentials, rows processed in order.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(R + 1, 0.0), v(C + 1, 0.0);
  std::vector<size_t> p(C + 1, 0), way(C + 1, 0);
  for (size_t i = 1; i <= R; ++i) {
    if (row_dead[i - 1]) continue;
    p[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(C + 1, inf);
    std::vector<char> used(C + 1, 0);
    do {
      used[j0] = 1;
      size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (size_t j = 1; j <= C; ++j) {
        if (used[j]) continue;
        double raw = cost_at(i0 - 1, j - 1);
        if (!std::isfinite(raw)) raw = big;
        double cur = raw - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= C; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (size_t j = 1; j <= C; ++j) {
    if (p[j] == 0) continue;
    size_t i = p[j] - 1, jj = j - 1;
    double raw = cost_at(i, jj);
    // A pairing forced through a forbidden edge is no pairing at all.
    if (!std::isfinite(raw)) continue;
    size_t row = transposed ? jj : i;
    size_t col = transposed ? i : jj;
    res.pairs.emplace_back(static_cast<int>(row), static_cast<int>(col));
    res.total_cost += raw;
  }
  std::sort(res.pairs.begin(), res.pairs.end());
  std::vector<char> row_used(nr, 0);
  for (const auto& pr : res.pairs) row_used[pr.first] = 1;
  for (size_t i = 0; i < nr; ++i)
    if (!row_used[i]) res.unmatched_rows.push_back(static_cast<int>(i));
  return res;
}

}  // namespace multimatch
