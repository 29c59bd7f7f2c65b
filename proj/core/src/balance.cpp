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

#include "multimatch/balance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "multimatch/errors.hpp"
#include "multimatch/sample.hpp"

namespace multimatch {
namespace {

constexpr double kCheckTol = 1e-9;
const char* kStratumKey = "stratum";

std::string kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::mean: return "mean";
    case ConstraintKind::fine: return "fine";
    case ConstraintKind::ks: return "ks";
    case ConstraintKind::exact: return "exact";
  }
  return "?";
}

// One side of a bipartite edge set, level-agnostic: units carry size 1,
// clusters their unit count.
struct Side {
  std::vector<const std::vector<double>*> covs;
  std::vector<double> size;
  std::vector<std::string> exact_key;  // filled per exact constraint
};

const CovariateSchema& resolve(const std::vector<CovariateSchema>& schema,
                               const BalanceConstraint& c, int* index) {
  for (size_t j = 0; j < schema.size(); ++j)
    if (schema[j].name == c.covariate) {
      *index = static_cast<int>(j);
      return schema[j];
    }
  throw spec_error(c.describe() + ": unknown covariate at this level");
}

void validate_constraint(const BalanceConstraint& c, const Dataset& data) {
  const auto& schema = (c.level == Level::unit) ? data.unit_schema : data.cluster_schema;
  bool is_stratum =
      c.kind == ConstraintKind::exact && c.level == Level::cluster && c.covariate == kStratumKey;
  const CovariateSchema* cov = nullptr;
  int j = -1;
  if (!is_stratum) cov = &resolve(schema, c, &j);
  if (cov && cov->role == Role::outcome)
    throw spec_error(c.describe() + ": constraints on the outcome are not allowed");
  if (c.weight_by_cluster_size &&
      (c.level != Level::cluster || c.kind != ConstraintKind::mean))
    throw spec_error(c.describe() +
                     ": weight_by_cluster_size applies to cluster-level mean constraints");
  switch (c.kind) {
    case ConstraintKind::mean:
      if (cov->kind == Kind::nominal)
        throw spec_error(c.describe() + ": mean balance needs a numeric covariate");
      if (!(c.tolerance > 0))
        throw spec_error(c.describe() + ": tolerance must be positive");
      break;
    case ConstraintKind::fine:
      if (cov->kind != Kind::nominal)
        throw spec_error(c.describe() + ": fine balance applies to nominal covariates");
      if (c.category_slack < 0)
        throw spec_error(c.describe() + ": category slack must be nonnegative");
      break;
    case ConstraintKind::ks:
      if (cov->kind == Kind::nominal)
        throw spec_error(c.describe() + ": ks balance needs a numeric covariate");
      if (!(c.max_gap > 0) || c.max_gap > 1)
        throw spec_error(c.describe() + ": max_gap must lie in (0,1]");
      if (c.grid_size < 1)
        throw spec_error(c.describe() + ": grid_size must be positive");
      break;
    case ConstraintKind::exact:
      if (!is_stratum && cov->kind == Kind::continuous)
        throw spec_error(c.describe() + ": exact matching needs a nominal or binary key");
      break;
  }
}

// Equiprobable cut-points i/(G+1), i=1..G, of the pooled pre-match values
// (empirical quantiles, lower value at ties), deduplicated.
std::vector<double> quantile_cuts(std::vector<double> values, int grid_size) {
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  size_t n = values.size();
  for (int i = 1; i <= grid_size; ++i) {
    double p = static_cast<double>(i) / (grid_size + 1);
    size_t idx = static_cast<size_t>(std::ceil(p * static_cast<double>(n)));
    idx = std::min(std::max<size_t>(idx, 1), n) - 1;
    if (cuts.empty() || values[idx] > cuts.back()) cuts.push_back(values[idx]);
  }
  return cuts;
}

std::vector<double> prematch_values(const Dataset& data, Level level, int cov_index) {
  std::vector<double> out;
  if (level == Level::unit) {
    for (const auto& cl : data.clusters)
      for (const auto& u : cl.units) out.push_back(u.covariates[cov_index]);
  } else {
    for (const auto& cl : data.clusters) out.push_back(cl.covariates[cov_index]);
  }
  return out;
}

EdgeConstraintSet build_edge_constraints(const std::vector<BalanceConstraint>& constraints,
                                         const Dataset& data, Level level, const Side& t,
                                         const Side& c,
                                         const std::vector<std::pair<int, int>>& edges,
                                         const std::vector<std::string>& t_stratum,
                                         const std::vector<std::string>& c_stratum) {
  const auto& schema = (level == Level::unit) ? data.unit_schema : data.cluster_schema;
  const auto& pooled = (level == Level::unit) ? data.unit_pooled_sd : data.cluster_pooled_sd;
  EdgeConstraintSet set;
  set.excluded.assign(edges.size(), 0);

  // Degree rows: each entity in at most one pair.
  std::vector<std::vector<int>> t_edges(t.covs.size()), c_edges(c.covs.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    t_edges[edges[e].first].push_back(static_cast<int>(e));
    c_edges[edges[e].second].push_back(static_cast<int>(e));
  }
  auto add_degree = [&set](const std::vector<std::vector<int>>& incident, const char* side) {
    for (size_t i = 0; i < incident.size(); ++i) {
      if (incident[i].empty()) continue;
      LinearConstraint row;
      for (int e : incident[i]) row.terms.emplace_back(e, 1.0);
      row.rel = Relation::le;
      row.rhs = 1.0;
      row.name = std::string("degree ") + side + " " + std::to_string(i);
      set.rows.push_back(std::move(row));
    }
  };
  add_degree(t_edges, "treated");
  add_degree(c_edges, "control");

  auto add_pair = [&set](const std::vector<double>& plus_coef, double bound,
                         const std::string& base) {
    LinearConstraint up, lo;
    for (size_t e = 0; e < plus_coef.size(); ++e) {
      up.terms.emplace_back(static_cast<int>(e), plus_coef[e] - bound);
      lo.terms.emplace_back(static_cast<int>(e), plus_coef[e] + bound);
    }
    up.rel = Relation::le;
    up.rhs = 0;
    up.name = base + " upper";
    lo.rel = Relation::ge;
    lo.rhs = 0;
    lo.name = base + " lower";
    set.rows.push_back(std::move(up));
    set.rows.push_back(std::move(lo));
  };

  for (const auto& con : constraints) {
    bool is_stratum = con.kind == ConstraintKind::exact && level == Level::cluster &&
                      con.covariate == kStratumKey;
    int j = -1;
    const CovariateSchema* cov = is_stratum ? nullptr : &resolve(schema, con, &j);
    switch (con.kind) {
      case ConstraintKind::mean: {
        double sd = pooled[j];
        std::vector<double> diff(edges.size());
        std::vector<double> mass(edges.size());
        for (size_t e = 0; e < edges.size(); ++e) {
          double xt = (*t.covs[edges[e].first])[j];
          double xc = (*c.covs[edges[e].second])[j];
          if (con.weight_by_cluster_size) {
            double nt = t.size[edges[e].first], nc = c.size[edges[e].second];
            diff[e] = nt * xt - nc * xc;
            mass[e] = (nt + nc) / 2.0;
          } else {
            diff[e] = xt - xc;
            mass[e] = 1.0;
          }
        }
        LinearConstraint up, lo;
        for (size_t e = 0; e < edges.size(); ++e) {
          up.terms.emplace_back(static_cast<int>(e), diff[e] - con.tolerance * sd * mass[e]);
          lo.terms.emplace_back(static_cast<int>(e), diff[e] + con.tolerance * sd * mass[e]);
        }
        up.rel = Relation::le;
        up.rhs = 0;
        up.name = con.describe() + " upper";
        lo.rel = Relation::ge;
        lo.rhs = 0;
        lo.name = con.describe() + " lower";
        set.rows.push_back(std::move(up));
        set.rows.push_back(std::move(lo));
        break;
      }
      case ConstraintKind::fine: {
        for (size_t cat = 0; cat < cov->categories.size(); ++cat) {
          LinearConstraint up, lo;
          bool any = false;
          for (size_t e = 0; e < edges.size(); ++e) {
            double it = (*t.covs[edges[e].first])[j] == static_cast<double>(cat) ? 1.0 : 0.0;
            double ic = (*c.covs[edges[e].second])[j] == static_cast<double>(cat) ? 1.0 : 0.0;
            if (it == ic) continue;
            up.terms.emplace_back(static_cast<int>(e), it - ic);
            lo.terms.emplace_back(static_cast<int>(e), it - ic);
            any = true;
          }
          if (!any) continue;
          std::string base = con.describe() + " [" + cov->categories[cat] + "]";
          up.rel = Relation::le;
          up.rhs = con.category_slack;
          up.name = base + " upper";
          lo.rel = Relation::ge;
          lo.rhs = -con.category_slack;
          lo.name = base + " lower";
          set.rows.push_back(std::move(up));
          set.rows.push_back(std::move(lo));
        }
        break;
      }
      case ConstraintKind::ks: {
        std::vector<double> cuts =
            quantile_cuts(prematch_values(data, level, j), con.grid_size);
        for (double cut : cuts) {
          std::vector<double> coef(edges.size());
          for (size_t e = 0; e < edges.size(); ++e) {
            double it = (*t.covs[edges[e].first])[j] <= cut ? 1.0 : 0.0;
            double ic = (*c.covs[edges[e].second])[j] <= cut ? 1.0 : 0.0;
            coef[e] = it - ic;
          }
          std::ostringstream base;
          base << con.describe() << " @" << cut;
          add_pair(coef, con.max_gap, base.str());
        }
        break;
      }
      case ConstraintKind::exact: {
        for (size_t e = 0; e < edges.size(); ++e) {
          bool cross;
          if (is_stratum)
            cross = t_stratum[edges[e].first] != c_stratum[edges[e].second];
          else
            cross = (*t.covs[edges[e].first])[j] != (*c.covs[edges[e].second])[j];
          if (!cross) continue;
          set.excluded[e] = 1;
          LinearConstraint row;
          row.terms.emplace_back(static_cast<int>(e), 1.0);
          row.rel = Relation::le;
          row.rhs = 0;
          row.name = con.describe() + " edge " + std::to_string(e);
          set.rows.push_back(std::move(row));
        }
        break;
      }
    }
  }
  return set;
}

double ecdf_at(const std::vector<double>& sorted_values, double x) {
  auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  return static_cast<double>(it - sorted_values.begin()) /
         static_cast<double>(sorted_values.size());
}

std::vector<double> collect(const std::vector<const Unit*>& units, int j) {
  std::vector<double> v;
  v.reserve(units.size());
  for (const Unit* u : units) v.push_back(u->covariates[j]);
  return v;
}

std::vector<double> collect(const std::vector<const Cluster*>& clusters, int j) {
  std::vector<double> v;
  v.reserve(clusters.size());
  for (const Cluster* c : clusters) v.push_back(c->covariates[j]);
  return v;
}

double proportion(const std::vector<double>& values, double cat) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double n = 0;
  for (double v : values)
    if (v == cat) ++n;
  return n / static_cast<double>(values.size());
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double weighted_mean(const std::vector<double>& values, const std::vector<double>& w) {
  double s = 0, sw = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    s += values[i] * w[i];
    sw += w[i];
  }
  return sw > 0 ? s / sw : std::numeric_limits<double>::quiet_NaN();
}

double abs_std_diff(double mt, double mc, double sd) {
  double diff = std::abs(mt - mc);
  if (sd > 0) return diff / sd;
  return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

std::string BalanceConstraint::describe() const {
  std::ostringstream out;
  out << kind_name(kind) << "(" << covariate << ")";
  switch (kind) {
    case ConstraintKind::mean:
      out << " tol " << tolerance << (weight_by_cluster_size ? " weighted" : "");
      break;
    case ConstraintKind::fine: out << " slack " << category_slack; break;
    case ConstraintKind::ks: out << " gap " << max_gap; break;
    case ConstraintKind::exact: break;
  }
  out << (level == Level::unit ? " [unit]" : " [cluster]");
  return out.str();
}

void validate_spec(const BalanceSpec& spec, const Dataset& data) {
  for (const auto& c : spec.unit_constraints) {
    if (c.level != Level::unit)
      throw spec_error(c.describe() + ": listed among unit constraints");
    validate_constraint(c, data);
  }
  for (const auto& c : spec.cluster_constraints) {
    if (c.level != Level::cluster)
      throw spec_error(c.describe() + ": listed among cluster constraints");
    validate_constraint(c, data);
  }
}

EdgeConstraintSet build_unit_constraints(const BalanceSpec& spec, const Dataset& data,
                                         const std::vector<const Unit*>& treated,
                                         const std::vector<const Unit*>& control,
                                         const std::vector<std::pair<int, int>>& edges) {
  Side t, c;
  for (const Unit* u : treated) {
    t.covs.push_back(&u->covariates);
    t.size.push_back(1.0);
  }
  for (const Unit* u : control) {
    c.covs.push_back(&u->covariates);
    c.size.push_back(1.0);
  }
  return build_edge_constraints(spec.unit_constraints, data, Level::unit, t, c, edges, {},
                                {});
}

EdgeConstraintSet build_cluster_constraints(const BalanceSpec& spec, const Dataset& data,
                                            const std::vector<const Cluster*>& treated,
                                            const std::vector<const Cluster*>& control,
                                            const std::vector<std::pair<int, int>>& edges) {
  Side t, c;
  std::vector<std::string> ts, cs;
  for (const Cluster* cl : treated) {
    t.covs.push_back(&cl->covariates);
    t.size.push_back(static_cast<double>(cl->units.size()));
    ts.push_back(cl->has_stratum ? cl->stratum : "");
  }
  for (const Cluster* cl : control) {
    c.covs.push_back(&cl->covariates);
    c.size.push_back(static_cast<double>(cl->units.size()));
    cs.push_back(cl->has_stratum ? cl->stratum : "");
  }
  return build_edge_constraints(spec.cluster_constraints, data, Level::cluster, t, c, edges,
                                ts, cs);
}

double ks_statistic(const std::vector<double>& treated_values,
                    const std::vector<double>& control_values) {
  if (treated_values.empty() || control_values.empty())
    throw data_error("ks statistic over an empty sample is undefined");
  std::vector<double> st = treated_values, sc = control_values;
  std::sort(st.begin(), st.end());
  std::sort(sc.begin(), sc.end());
  double gap = 0;
  for (double x : st) gap = std::max(gap, std::abs(ecdf_at(st, x) - ecdf_at(sc, x)));
  for (double x : sc) gap = std::max(gap, std::abs(ecdf_at(st, x) - ecdf_at(sc, x)));
  return gap;
}

double fine_balance_deviation(const std::vector<const Unit*>& matched_treated,
                              const std::vector<const Unit*>& matched_control,
                              const CovariateSchema& covariate, int cov_index) {
  if (covariate.kind != Kind::nominal)
    throw spec_error("fine balance deviation applies to nominal covariates");
  double total = 0;
  for (size_t cat = 0; cat < covariate.categories.size(); ++cat) {
    double ct = 0, cc = 0;
    for (const Unit* u : matched_treated)
      if (u->covariates[cov_index] == static_cast<double>(cat)) ++ct;
    for (const Unit* u : matched_control)
      if (u->covariates[cov_index] == static_cast<double>(cat)) ++cc;
    total += std::abs(ct - cc);
  }
  return total / 2.0;
}

double total_variation_distance(const std::vector<const Unit*>& matched_treated,
                                const std::vector<const Unit*>& matched_control,
                                const std::vector<int>& cov_indices,
                                const std::vector<CovariateSchema>& schema) {
  double total = 0;
  for (int j : cov_indices) {
    const auto& cov = schema[j];
    if (cov.kind != Kind::nominal)
      throw spec_error("total variation distance applies to nominal covariates");
    std::vector<double> vt = collect(matched_treated, j), vc = collect(matched_control, j);
    double per_cov = 0;
    for (size_t cat = 0; cat < cov.categories.size(); ++cat) {
      double pt = vt.empty() ? 0 : proportion(vt, static_cast<double>(cat));
      double pc = vc.empty() ? 0 : proportion(vc, static_cast<double>(cat));
      per_cov += std::abs(pt - pc);
    }
    total += per_cov / 2.0;
  }
  return total;
}

BalanceReport balance_report(const MatchedSample& sample, const Dataset& data,
                             const BalanceSpec& spec) {
  BalanceReport report;
  auto mt = sample.matched_units(data, true);
  auto mc = sample.matched_units(data, false);
  auto kt = sample.matched_clusters(data, true);
  auto kc = sample.matched_clusters(data, false);
  report.matched_units = mt.size();
  report.matched_cluster_pairs = sample.cluster_pairs.size();

  // Descriptive rows for every balance-role covariate.
  for (size_t j = 0; j < data.unit_schema.size(); ++j) {
    const auto& cov = data.unit_schema[j];
    if (cov.role != Role::balance) continue;
    if (cov.kind == Kind::nominal) {
      std::vector<double> vt = collect(mt, static_cast<int>(j));
      std::vector<double> vc = collect(mc, static_cast<int>(j));
      BalanceRow head;
      head.covariate = cov.name;
      head.level = Level::unit;
      head.mean_treated = head.mean_control = head.std_diff =
          std::numeric_limits<double>::quiet_NaN();
      head.fine_deviation = fine_balance_deviation(mt, mc, cov, static_cast<int>(j));
      report.rows.push_back(head);
      for (size_t cat = 0; cat < cov.categories.size(); ++cat) {
        BalanceRow row;
        row.covariate = cov.name;
        row.level = Level::unit;
        row.category = cov.categories[cat];
        row.mean_treated = proportion(vt, static_cast<double>(cat));
        row.mean_control = proportion(vc, static_cast<double>(cat));
        row.std_diff = std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(row);
      }
    } else {
      BalanceRow row;
      row.covariate = cov.name;
      row.level = Level::unit;
      std::vector<double> vt = collect(mt, static_cast<int>(j));
      std::vector<double> vc = collect(mc, static_cast<int>(j));
      row.mean_treated = mean(vt);
      row.mean_control = mean(vc);
      row.std_diff = (vt.empty() || vc.empty())
                         ? std::numeric_limits<double>::quiet_NaN()
                         : (row.mean_treated - row.mean_control) /
                               (data.unit_pooled_sd[j] > 0 ? data.unit_pooled_sd[j] : 1.0);
      if (cov.kind == Kind::continuous && !vt.empty() && !vc.empty())
        row.ks = ks_statistic(vt, vc);
      report.rows.push_back(row);
    }
  }
  for (size_t j = 0; j < data.cluster_schema.size(); ++j) {
    const auto& cov = data.cluster_schema[j];
    if (cov.role != Role::balance) continue;
    std::vector<double> vt = collect(kt, static_cast<int>(j));
    std::vector<double> vc = collect(kc, static_cast<int>(j));
    std::vector<double> wt, wc;
    for (const Cluster* cl : kt) wt.push_back(static_cast<double>(cl->units.size()));
    for (const Cluster* cl : kc) wc.push_back(static_cast<double>(cl->units.size()));
    for (bool weighted : {false, true}) {
      if (cov.kind == Kind::nominal) {
        for (size_t cat = 0; cat < cov.categories.size(); ++cat) {
          BalanceRow row;
          row.covariate = cov.name;
          row.level = Level::cluster;
          row.category = cov.categories[cat];
          row.weighted = weighted;
          std::vector<double> it, ic;
          for (double v : vt) it.push_back(v == static_cast<double>(cat) ? 1.0 : 0.0);
          for (double v : vc) ic.push_back(v == static_cast<double>(cat) ? 1.0 : 0.0);
          row.mean_treated = weighted ? weighted_mean(it, wt) : mean(it);
          row.mean_control = weighted ? weighted_mean(ic, wc) : mean(ic);
          row.std_diff = std::numeric_limits<double>::quiet_NaN();
          report.rows.push_back(row);
        }
      } else {
        BalanceRow row;
        row.covariate = cov.name;
        row.level = Level::cluster;
        row.weighted = weighted;
        row.mean_treated = weighted ? weighted_mean(vt, wt) : mean(vt);
        row.mean_control = weighted ? weighted_mean(vc, wc) : mean(vc);
        row.std_diff =
            (vt.empty() || vc.empty())
                ? std::numeric_limits<double>::quiet_NaN()
                : (row.mean_treated - row.mean_control) /
                      (data.cluster_pooled_sd[j] > 0 ? data.cluster_pooled_sd[j] : 1.0);
        report.rows.push_back(row);
      }
    }
  }

  // Declared-constraint checks. Mean and KS constraints aggregate across
  // cluster pairs exactly as enforced; fine constraints are binding within
  // each cluster pair, so the worst pair decides.
  auto check_unit = [&](const BalanceConstraint& con) {
    ConstraintCheck check;
    check.constraint = con;
    int j = -1;
    resolve(data.unit_schema, con, &j);
    switch (con.kind) {
      case ConstraintKind::mean: {
        check.bound = con.tolerance;
        if (mt.empty()) break;
        check.achieved =
            abs_std_diff(mean(collect(mt, j)), mean(collect(mc, j)), data.unit_pooled_sd[j]);
        break;
      }
      case ConstraintKind::ks: {
        check.bound = con.max_gap;
        if (mt.empty()) break;
        std::vector<double> cuts = quantile_cuts(prematch_values(data, Level::unit, j),
                                                 con.grid_size);
        std::vector<double> vt = collect(mt, j), vc = collect(mc, j);
        std::sort(vt.begin(), vt.end());
        std::sort(vc.begin(), vc.end());
        for (double cut : cuts)
          check.achieved = std::max(check.achieved,
                                    std::abs(ecdf_at(vt, cut) - ecdf_at(vc, cut)));
        break;
      }
      case ConstraintKind::fine: {
        check.bound = con.category_slack;
        for (const auto& cp : sample.cluster_pairs) {
          std::vector<const Unit*> pt, pc;
          for (const auto& up : cp.unit_pairs) {
            pt.push_back(data.find_unit(up.treated_unit));
            pc.push_back(data.find_unit(up.control_unit));
          }
          const auto& cov = data.unit_schema[j];
          for (size_t cat = 0; cat < cov.categories.size(); ++cat) {
            double ct = 0, cc = 0;
            for (const Unit* u : pt)
              if (u->covariates[j] == static_cast<double>(cat)) ++ct;
            for (const Unit* u : pc)
              if (u->covariates[j] == static_cast<double>(cat)) ++cc;
            check.achieved = std::max(check.achieved, std::abs(ct - cc));
          }
        }
        break;
      }
      case ConstraintKind::exact: {
        check.bound = 0;
        for (const auto& cp : sample.cluster_pairs)
          for (const auto& up : cp.unit_pairs) {
            const Unit* ut = data.find_unit(up.treated_unit);
            const Unit* uc = data.find_unit(up.control_unit);
            if (ut->covariates[j] != uc->covariates[j]) ++check.achieved;
          }
        break;
      }
    }
    check.violated = check.achieved > check.bound + kCheckTol;
    return check;
  };

  auto check_cluster = [&](const BalanceConstraint& con) {
    ConstraintCheck check;
    check.constraint = con;
    bool is_stratum = con.kind == ConstraintKind::exact && con.covariate == kStratumKey;
    int j = -1;
    if (!is_stratum) resolve(data.cluster_schema, con, &j);
    switch (con.kind) {
      case ConstraintKind::mean: {
        check.bound = con.tolerance;
        if (kt.empty()) break;
        double sd = data.cluster_pooled_sd[j];
        if (con.weight_by_cluster_size) {
          double num = 0, mass = 0;
          for (const Cluster* cl : kt) {
            num += cl->covariates[j] * static_cast<double>(cl->units.size());
            mass += static_cast<double>(cl->units.size());
          }
          for (const Cluster* cl : kc) {
            num -= cl->covariates[j] * static_cast<double>(cl->units.size());
            mass += static_cast<double>(cl->units.size());
          }
          double scale = sd * mass / 2.0;
          check.achieved = scale > 0
                               ? std::abs(num) / scale
                               : (num == 0 ? 0.0 : std::numeric_limits<double>::infinity());
        } else {
          check.achieved = abs_std_diff(mean(collect(kt, j)), mean(collect(kc, j)), sd);
        }
        break;
      }
      case ConstraintKind::ks: {
        check.bound = con.max_gap;
        if (kt.empty()) break;
        std::vector<double> cuts = quantile_cuts(prematch_values(data, Level::cluster, j),
                                                 con.grid_size);
        std::vector<double> vt = collect(kt, j), vc = collect(kc, j);
        std::sort(vt.begin(), vt.end());
        std::sort(vc.begin(), vc.end());
        for (double cut : cuts)
          check.achieved = std::max(check.achieved,
                                    std::abs(ecdf_at(vt, cut) - ecdf_at(vc, cut)));
        break;
      }
      case ConstraintKind::fine: {
        check.bound = con.category_slack;
        const auto& cov = data.cluster_schema[j];
        for (size_t cat = 0; cat < cov.categories.size(); ++cat) {
          double ct = 0, cc = 0;
          for (const Cluster* cl : kt)
            if (cl->covariates[j] == static_cast<double>(cat)) ++ct;
          for (const Cluster* cl : kc)
            if (cl->covariates[j] == static_cast<double>(cat)) ++cc;
          check.achieved = std::max(check.achieved, std::abs(ct - cc));
        }
        break;
      }
      case ConstraintKind::exact: {
        check.bound = 0;
        for (size_t p = 0; p < kt.size(); ++p) {
          bool cross;
          if (is_stratum)
            cross = (kt[p]->has_stratum ? kt[p]->stratum : "") !=
                    (kc[p]->has_stratum ? kc[p]->stratum : "");
          else
            cross = kt[p]->covariates[j] != kc[p]->covariates[j];
          if (cross) ++check.achieved;
        }
        break;
      }
    }
    check.violated = check.achieved > check.bound + kCheckTol;
    return check;
  };

  for (const auto& con : spec.unit_constraints) report.checks.push_back(check_unit(con));
  for (const auto& con : spec.cluster_constraints)
    report.checks.push_back(check_cluster(con));
  for (const auto& check : report.checks)
    if (check.violated) ++report.violations;

  std::vector<int> nominal_unit;
  for (size_t j = 0; j < data.unit_schema.size(); ++j)
    if (data.unit_schema[j].role == Role::balance &&
        data.unit_schema[j].kind == Kind::nominal)
      nominal_unit.push_back(static_cast<int>(j));
  if (!nominal_unit.empty() && !mt.empty()) {
    report.tv_unit = total_variation_distance(mt, mc, nominal_unit, data.unit_schema);
    report.tv_unit_mean = report.tv_unit / static_cast<double>(nominal_unit.size());
  }
  return report;
}

CsvTable balance_report_csv(const BalanceReport& report) {
  CsvTable t;
  t.header = {"level",     "covariate", "category",  "weighted",
              "mean_treated", "mean_control", "std_diff", "ks", "fine_deviation"};
  for (const auto& row : report.rows) {
    t.rows.push_back({row.level == Level::unit ? "unit" : "cluster", row.covariate,
                      row.category, row.weighted ? "1" : "0",
                      format_number(row.mean_treated), format_number(row.mean_control),
                      format_number(row.std_diff), format_number(row.ks),
                      format_number(row.fine_deviation)});
  }
  return t;
}

std::string BalanceReport::to_text() const {
  std::ostringstream out;
  out << "Matched sample: " << matched_units << " unit pairs in " << matched_cluster_pairs
      << " cluster pairs\n";
  char buf[256];
  out << "\n  level    covariate                      treated    control   std.diff\n";
  for (const auto& row : rows) {
    std::string name = row.covariate + (row.category.empty() ? "" : "=" + row.category) +
                       (row.weighted ? " (weighted)" : "");
    std::snprintf(buf, sizeof(buf), "  %-8s %-28s %10s %10s %10s\n",
                  row.level == Level::unit ? "unit" : "cluster", name.c_str(),
                  format_number(row.mean_treated, 4).c_str(),
                  format_number(row.mean_control, 4).c_str(),
                  format_number(row.std_diff, 3).c_str());
    out << buf;
  }
  out << "\nConstraint checks:\n";
  for (const auto& check : checks) {
    std::snprintf(buf, sizeof(buf), "  %-44s achieved %8s bound %8s  %s\n",
                  check.constraint.describe().c_str(),
                  format_number(check.achieved, 4).c_str(),
                  format_number(check.bound, 4).c_str(),
                  check.violated ? "VIOLATED" : "ok");
    out << buf;
  }
  out << "\nViolations: " << violations << "\n";
  out << "TV distance over nominal unit covariates: " << format_number(tv_unit, 4)
      << " (per-covariate mean " << format_number(tv_unit_mean, 4) << ")\n";
  return out.str();
}

}  // namespace multimatch
