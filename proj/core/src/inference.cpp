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

#include "multimatch/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "multimatch/distance.hpp"
#include "multimatch/errors.hpp"

namespace multimatch {
namespace {

constexpr double kHuberK = 1.345;
constexpr int kHuberMaxIter = 50;
constexpr int kExactLimit = 20;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double median_of(std::vector<double> v) {
  size_t n = v.size();
  if (n == 0) return 0.0;
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return (v[n / 2 - 1] + hi) / 2.0;
}

double sample_sd(const std::vector<double>& v) {
  size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// Greedy maximal linearly independent column set; column 0 always kept.
std::vector<int> independent_columns(const Eigen::MatrixXd& x) {
  std::vector<int> keep;
  Eigen::MatrixXd cur(x.rows(), 0);
  for (int j = 0; j < x.cols(); ++j) {
    Eigen::MatrixXd cand(x.rows(), cur.cols() + 1);
    if (cur.cols() > 0) cand.leftCols(cur.cols()) = cur;
    cand.col(cur.cols()) = x.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cand);
    if (qr.rank() == cand.cols()) {
      cur = std::move(cand);
      keep.push_back(j);
    }
  }
  return keep;
}

ScoredSample mirrored(ScoredSample s) {
  for (double& q : s.Q) q = -q;
  s.T = -s.T;
  return s;
}

std::vector<int> regression_covariates(const Dataset& data) {
  std::vector<int> out;
  for (size_t j = 0; j < data.unit_schema.size(); ++j) {
    const auto& cov = data.unit_schema[j];
    if (cov.kind == Kind::nominal) continue;
    if (cov.role == Role::balance || cov.role == Role::distance_only)
      out.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace

MatchedDesign matched_design(const MatchedSample& sample, const Dataset& data,
                             double tau0) {
  MatchedDesign design;
  std::vector<int> covs = regression_covariates(data);
  int pair_k = 0;
  for (const auto& cp : sample.cluster_pairs) {
    if (cp.unit_pairs.empty()) continue;
    const Cluster* tcl = data.find_cluster(cp.treated_cluster);
    const Cluster* ccl = data.find_cluster(cp.control_cluster);
    if (!tcl || !ccl) throw data_error("matched sample names an unknown cluster");
    auto push = [&](const std::string& unit_id, bool is_treated) {
      const Unit* u = data.find_unit(unit_id);
      if (!u) throw data_error("matched sample names an unknown unit '" + unit_id + "'");
      if (!u->has_outcome)
        throw data_error("matched unit '" + unit_id + "' has no outcome");
      design.outcomes.push_back(u->outcome - (is_treated ? tau0 : 0.0));
      std::vector<double> row;
      row.reserve(covs.size());
      for (int j : covs) row.push_back(u->covariates[j]);
      design.covariates.push_back(std::move(row));
      design.pair_index.push_back(pair_k);
      design.treated.push_back(is_treated ? 1 : 0);
    };
    for (const auto& up : cp.unit_pairs) push(up.treated_unit, true);
    for (const auto& up : cp.unit_pairs) push(up.control_unit, false);
    design.pair_units.push_back(static_cast<long>(2 * cp.unit_pairs.size()));
    design.pair_weight_mass.push_back(
        static_cast<double>(tcl->units.size() + ccl->units.size()));
    ++pair_k;
  }
  if (design.outcomes.empty()) throw data_error("matched sample has no unit pairs");
  return design;
}

std::vector<double> huber_residual_ranks(const std::vector<double>& outcomes,
                                         const std::vector<std::vector<double>>& covariates,
                                         bool* converged) {
  size_t n = outcomes.size();
  if (covariates.size() != n) throw data_error("outcome and covariate row counts differ");
  size_t p = n == 0 ? 0 : covariates[0].size();
  if (converged) *converged = true;
  if (n == 0) return {};

  Eigen::MatrixXd full(n, p + 1);
  Eigen::VectorXd y(n);
  for (size_t i = 0; i < n; ++i) {
    full(i, 0) = 1.0;
    for (size_t j = 0; j < p; ++j) full(i, j + 1) = covariates[i][j];
    y(i) = outcomes[i];
  }
  std::vector<int> keep = independent_columns(full);
  Eigen::MatrixXd x(n, keep.size());
  for (size_t j = 0; j < keep.size(); ++j) x.col(j) = full.col(keep[j]);

  Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  Eigen::VectorXd ls_beta = beta;
  double yscale = y.cwiseAbs().maxCoeff();
  bool ok = false;
  for (int iter = 0; iter < kHuberMaxIter; ++iter) {
    Eigen::VectorXd r = y - x * beta;
    std::vector<double> rv(r.data(), r.data() + r.size());
    double center = median_of(rv);
    for (double& v : rv) v = std::abs(v - center);
    double scale = 1.4826 * median_of(rv);
    if (scale <= 1e-12 * std::max(1.0, yscale)) {
      ok = true;  // effectively a perfect fit
      break;
    }
    double cut = kHuberK * scale;
    Eigen::VectorXd w(n);
    for (size_t i = 0; i < n; ++i) {
      double a = std::abs(r(static_cast<Eigen::Index>(i)));
      w(static_cast<Eigen::Index>(i)) = a <= cut ? 1.0 : cut / a;
    }
    Eigen::MatrixXd xtwx = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd xtwy = x.transpose() * (w.asDiagonal() * y);
    Eigen::VectorXd next = xtwx.ldlt().solve(xtwy);
    double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (delta <= 1e-10 * (1.0 + beta.cwiseAbs().maxCoeff())) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    beta = ls_beta;  // least-squares fallback
    if (converged) *converged = false;
  }
  Eigen::VectorXd r = y - x * beta;
  std::vector<double> residuals(r.data(), r.data() + r.size());
  // Solver noise on an exact fit must not break rank ties.
  double snap = 1e-9 * (1.0 + yscale);
  for (double& v : residuals)
    if (std::abs(v) <= snap) v = 0.0;
  return average_ranks(residuals);
}

ScoredSample cluster_statistic(const MatchedSample& sample, const Dataset& data,
                               const std::vector<double>& q, WeightRule rule) {
  ScoredSample scored;
  scored.unit_scores = q;
  std::vector<double> mass;
  std::vector<double> diff;  // mean q treated side - mean q control side
  size_t pos = 0;
  for (const auto& cp : sample.cluster_pairs) {
    if (cp.unit_pairs.empty()) continue;
    size_t m = cp.unit_pairs.size();
    if (pos + 2 * m > q.size())
      throw data_error("unit score vector shorter than the matched sample");
    double t_sum = 0.0, c_sum = 0.0;
    for (size_t i = 0; i < m; ++i) t_sum += q[pos + i];
    for (size_t i = 0; i < m; ++i) c_sum += q[pos + m + i];
    pos += 2 * m;
    diff.push_back(t_sum / static_cast<double>(m) - c_sum / static_cast<double>(m));
    const Cluster* tcl = data.find_cluster(cp.treated_cluster);
    const Cluster* ccl = data.find_cluster(cp.control_cluster);
    if (!tcl || !ccl) throw data_error("matched sample names an unknown cluster");
    mass.push_back(static_cast<double>(tcl->units.size() + ccl->units.size()));
  }
  if (pos != q.size()) throw data_error("unit score vector longer than the matched sample");

  double total_mass = 0.0;
  for (double v : mass) total_mass += v;
  for (size_t k = 0; k < diff.size(); ++k) {
    double w = rule == WeightRule::constant
                   ? 1.0
                   : (total_mass > 0 ? mass[k] / total_mass : 0.0);
    scored.weights.push_back(w);
    scored.B.push_back(1.0);
    scored.Q.push_back(w * diff[k]);
    scored.T += scored.Q.back();
    scored.variance += scored.Q.back() * scored.Q.back();
  }
  scored.degenerate = scored.variance <= 0.0;
  return scored;
}

ScoredSample score_sample(const MatchedSample& sample, const Dataset& data,
                          WeightRule rule, double tau0) {
  MatchedDesign design = matched_design(sample, data, tau0);
  bool converged = true;
  std::vector<double> q =
      huber_residual_ranks(design.outcomes, design.covariates, &converged);
  ScoredSample scored = cluster_statistic(sample, data, q, rule);
  scored.huber_converged = converged;
  return scored;
}

double sensitivity_bound(const ScoredSample& scored, double gamma, PValueMode mode) {
  if (gamma < 1.0) throw config_error("gamma must be at least 1");
  size_t k = scored.Q.size();
  double abs_sum = 0.0;
  for (double qv : scored.Q) abs_sum += std::abs(qv);
  double p_plus = gamma / (1.0 + gamma);

  if (mode == PValueMode::exact) {
    if (k > kExactLimit)
      throw config_error("exact mode requires at most 20 matched cluster pairs");
    double eps = 1e-9 * (1.0 + abs_sum);
    // Independent worst-case signs at odds gamma : 1 toward +|Q_k|.
    std::vector<double> pow_plus(k + 1, 1.0), pow_minus(k + 1, 1.0);
    for (size_t i = 1; i <= k; ++i) {
      pow_plus[i] = pow_plus[i - 1] * p_plus;
      pow_minus[i] = pow_minus[i - 1] * (1.0 - p_plus);
    }
    double p = 0.0;
    size_t total = size_t{1} << k;
    for (size_t mask = 0; mask < total; ++mask) {
      double t = 0.0;
      int plus = 0;
      for (size_t i = 0; i < k; ++i) {
        if (mask & (size_t{1} << i)) {
          t += std::abs(scored.Q[i]);
          ++plus;
        } else {
          t -= std::abs(scored.Q[i]);
        }
      }
      if (t >= scored.T - eps)
        p += pow_plus[plus] * pow_minus[k - static_cast<size_t>(plus)];
    }
    return std::min(1.0, p);
  }

  double mu = (gamma - 1.0) / (gamma + 1.0) * abs_sum;
  double var = 4.0 * gamma / ((1.0 + gamma) * (1.0 + gamma)) * scored.variance;
  if (var <= 0.0) return scored.T <= mu + 1e-12 ? 1.0 : 0.0;
  return 1.0 - normal_cdf((scored.T - mu) / std::sqrt(var));
}

double randomization_pvalue(const ScoredSample& scored, PValueMode mode) {
  return sensitivity_bound(scored, 1.0, mode);
}

namespace {

double shifted_t(const MatchedSample& sample, const Dataset& data, WeightRule rule,
                 double tau0) {
  return score_sample(sample, data, rule, tau0).T;
}

double outcome_sd(const MatchedSample& sample, const Dataset& data) {
  return sample_sd(matched_design(sample, data, 0.0).outcomes);
}

}  // namespace

double hl_estimate(const MatchedSample& sample, const Dataset& data, WeightRule rule) {
  double sd = outcome_sd(sample, data);
  double span = 10.0 * sd;
  double lo = -span, hi = span;
  double flo = shifted_t(sample, data, rule, lo);
  if (flo == 0.0) return lo;
  double fhi = shifted_t(sample, data, rule, hi);
  if (fhi == 0.0 && flo > 0.0) return hi;
  if (flo < 0.0 || fhi > 0.0)
    throw data_error("shift estimate is not bracketed within 10 outcome SDs");
  double tol = 1e-6 * std::max(1.0, sd);
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (shifted_t(sample, data, rule, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> confidence_interval(const MatchedSample& sample,
                                              const Dataset& data, WeightRule rule,
                                              double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) throw config_error("alpha must be inside (0, 1)");
  double sd = outcome_sd(sample, data);
  double span = 10.0 * std::max(sd, 1e-12);
  double tol = 1e-6 * std::max(1.0, sd);
  double half = alpha / 2.0;

  auto upper_p = [&](double tau) {
    return randomization_pvalue(score_sample(sample, data, rule, tau), PValueMode::normal);
  };
  auto lower_p = [&](double tau) {
    return randomization_pvalue(mirrored(score_sample(sample, data, rule, tau)),
                                PValueMode::normal);
  };

  // Lower endpoint: the smallest shift the upper-tail test fails to reject.
  if (upper_p(-span) > half)
    throw data_error("lower confidence endpoint is not bracketed within 10 outcome SDs");
  double lo = -span, hi = span;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (upper_p(mid) > half)
      hi = mid;
    else
      lo = mid;
  }
  double ci_lo = 0.5 * (lo + hi);

  if (lower_p(span) > half)
    throw data_error("upper confidence endpoint is not bracketed within 10 outcome SDs");
  lo = -span;
  hi = span;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (lower_p(mid) > half)
      lo = mid;
    else
      hi = mid;
  }
  double ci_hi = 0.5 * (lo + hi);
  return {ci_lo, ci_hi};
}

double equivalence_pvalue(const MatchedSample& sample, const Dataset& data,
                          WeightRule rule, double delta, double gamma, PValueMode mode) {
  if (delta <= 0.0) throw config_error("equivalence margin must be positive");
  // Inferiority side: tau <= -delta is rejected by a large shifted statistic.
  double p_left = sensitivity_bound(score_sample(sample, data, rule, -delta), gamma, mode);
  // Superiority side: tau >= +delta is rejected by a small shifted statistic.
  double p_right =
      sensitivity_bound(mirrored(score_sample(sample, data, rule, delta)), gamma, mode);
  return std::max(p_left, p_right);
}

GammaThreshold gamma_threshold(const MatchedSample& sample, const Dataset& data,
                               WeightRule rule, double alpha, double delta,
                               PValueMode mode) {
  ScoredSample at_null = score_sample(sample, data, rule, 0.0);
  auto bounded_p = [&](double gamma) {
    return delta > 0.0 ? equivalence_pvalue(sample, data, rule, delta, gamma, mode)
                       : sensitivity_bound(at_null, gamma, mode);
  };
  GammaThreshold out;
  if (bounded_p(1.0) > alpha) {
    out.not_significant = true;
    return out;
  }
  if (bounded_p(100.0) <= alpha) {
    out.gamma_star = 100.0;
    out.exceeded_grid = true;
    return out;
  }
  double lo = 1.0, hi = 100.0;
  while (hi - lo > 0.01) {
    double mid = 0.5 * (lo + hi);
    if (bounded_p(mid) > alpha)
      hi = mid;
    else
      lo = mid;
  }
  out.gamma_star = 0.5 * (lo + hi);
  return out;
}

InferenceResult analyze_sample(const MatchedSample& sample, const Dataset& data,
                               const InferenceOptions& options) {
  InferenceResult res;
  res.alpha = options.alpha;
  res.weight_rule = options.weight_rule;

  ScoredSample scored = score_sample(sample, data, options.weight_rule, 0.0);
  int k = static_cast<int>(scored.Q.size());
  res.mode = (options.exact_when_small && k <= kExactLimit) ? PValueMode::exact
                                                            : PValueMode::normal;
  res.T = scored.T;
  res.variance = scored.variance;
  res.degenerate = scored.degenerate;
  res.huber_converged = scored.huber_converged;
  res.p_one_sided = randomization_pvalue(scored, res.mode);
  res.n_cluster_pairs = k;
  for (const auto& cp : sample.cluster_pairs)
    res.n_unit_pairs += static_cast<long>(cp.unit_pairs.size());

  try {
    res.tau_hat = hl_estimate(sample, data, options.weight_rule);
    auto ci = confidence_interval(sample, data, options.weight_rule, options.alpha);
    res.ci_lo = ci.first;
    res.ci_hi = ci.second;
  } catch (const data_error&) {
    res.estimable = false;
    res.tau_hat = 0.0;
    res.ci_lo = res.ci_hi = 0.0;
  }

  for (double delta : options.deltas)
    res.equivalence.emplace_back(
        delta, equivalence_pvalue(sample, data, options.weight_rule, delta, 1.0, res.mode));

  std::vector<double> grid = options.gamma_grid;
  if (grid.empty())
    for (int i = 10; i <= 30; ++i) grid.push_back(i / 10.0);
  for (double g : grid)
    res.sensitivity.emplace_back(g, sensitivity_bound(scored, g, res.mode));

  res.gamma_star = gamma_threshold(sample, data, options.weight_rule, options.alpha, 0.0,
                                   res.mode);
  return res;
}

std::string inference_json(const InferenceResult& result) {
  nlohmann::json j;
  j["statistic"] = {
      {"T", result.T},
      {"variance", result.variance},
      {"p_one_sided", result.p_one_sided},
      {"mode", result.mode == PValueMode::exact ? "exact" : "normal"},
      {"weight_rule",
       result.weight_rule == WeightRule::constant ? "constant" : "size-proportional"},
      {"degenerate", result.degenerate},
      {"huber_converged", result.huber_converged},
  };
  j["matched"] = {{"cluster_pairs", result.n_cluster_pairs},
                  {"unit_pairs", result.n_unit_pairs}};
  if (result.estimable) {
    j["estimate"] = {{"tau_hat", result.tau_hat},
                     {"ci_lo", result.ci_lo},
                     {"ci_hi", result.ci_hi},
                     {"alpha", result.alpha}};
  } else {
    j["estimate"] = {{"tau_hat", nullptr},
                     {"ci_lo", nullptr},
                     {"ci_hi", nullptr},
                     {"alpha", result.alpha}};
  }
  j["equivalence"] = nlohmann::json::array();
  for (const auto& [delta, p] : result.equivalence)
    j["equivalence"].push_back({{"delta", delta}, {"p", p}});
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& [gamma, p] : result.sensitivity)
    sweep.push_back({{"gamma", gamma}, {"p_upper", p}});
  j["sensitivity"] = {{"sweep", sweep},
                      {"gamma_star", result.gamma_star.gamma_star},
                      {"exceeded_grid", result.gamma_star.exceeded_grid},
                      {"not_significant", result.gamma_star.not_significant}};
  return j.dump(2) + "\n";
}

std::string inference_text(const InferenceResult& result) {
  std::ostringstream out;
  char buf[160];
  out << "Randomization inference on the matched sample\n";
  std::snprintf(buf, sizeof(buf), "  cluster pairs: %d, unit pairs: %ld\n",
                result.n_cluster_pairs, result.n_unit_pairs);
  out << buf;
  std::snprintf(buf, sizeof(buf), "  T = %.6g, variance = %.6g (%s mode, %s weights)\n",
                result.T, result.variance,
                result.mode == PValueMode::exact ? "exact" : "normal",
                result.weight_rule == WeightRule::constant ? "constant"
                                                           : "size-proportional");
  out << buf;
  std::snprintf(buf, sizeof(buf), "  one-sided p = %.6g%s\n", result.p_one_sided,
                result.degenerate ? " (degenerate scores)" : "");
  out << buf;
  if (!result.huber_converged)
    out << "  note: Huber regression fell back to least squares\n";
  if (result.estimable) {
    std::snprintf(buf, sizeof(buf),
                  "  shift estimate = %.6g, %g%% CI [%.6g, %.6g]\n", result.tau_hat,
                  100.0 * (1.0 - result.alpha), result.ci_lo, result.ci_hi);
    out << buf;
  } else {
    out << "  shift estimate: not bracketed within 10 outcome SDs\n";
  }
  if (!result.equivalence.empty()) {
    out << "  equivalence tests:\n";
    for (const auto& [delta, p] : result.equivalence) {
      std::snprintf(buf, sizeof(buf), "    margin %.6g: p = %.6g\n", delta, p);
      out << buf;
    }
  }
  if (result.gamma_star.not_significant) {
    out << "  sensitivity: not significant at gamma = 1\n";
  } else if (result.gamma_star.exceeded_grid) {
    out << "  sensitivity: bound stays below alpha up to gamma = 100 (gamma* > 100)\n";
  } else {
    std::snprintf(buf, sizeof(buf), "  sensitivity: gamma* = %.2f at alpha = %g\n",
                  result.gamma_star.gamma_star, result.alpha);
    out << buf;
  }
  return out.str();
}

CsvTable gamma_sweep_csv(const InferenceResult& result) {
  CsvTable table;
  table.header = {"gamma", "p_upper"};
  for (const auto& [gamma, p] : result.sensitivity)
    table.rows.push_back({format_number(gamma), format_number(p)});
  return table;
}

}  // namespace multimatch
