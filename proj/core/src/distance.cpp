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

#include "multimatch/distance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "multimatch/errors.hpp"

namespace multimatch {

std::vector<double> average_ranks(const std::vector<double>& values) {
  size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&values](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace {

constexpr double kCaliperPenalty = 1000.0;

DistanceMatrix rank_mahalanobis(const std::vector<std::vector<double>>& treated_rows,
                                const std::vector<std::vector<double>>& control_rows,
                                const std::vector<std::string>& cov_names,
                                std::vector<std::string> row_ids,
                                std::vector<std::string> col_ids) {
  size_t nt = treated_rows.size(), nc = control_rows.size(), n = nt + nc;
  size_t p_in = cov_names.size();
  DistanceMatrix out;
  out.row_ids = std::move(row_ids);
  out.col_ids = std::move(col_ids);
  out.d.assign(nt * nc, 0.0);

  // Pooled ranks per covariate; covariates without two distinct values
  // carry no ordering information and are dropped.
  std::vector<std::vector<double>> ranked;
  for (size_t j = 0; j < p_in; ++j) {
    std::vector<double> column;
    column.reserve(n);
    for (const auto& row : treated_rows) column.push_back(row[j]);
    for (const auto& row : control_rows) column.push_back(row[j]);
    auto [mn, mx] = std::minmax_element(column.begin(), column.end());
    if (n < 2 || *mn == *mx) {
      out.dropped_covariates.push_back(cov_names[j]);
      continue;
    }
    ranked.push_back(average_ranks(column));
  }
  size_t p = ranked.size();
  if (p == 0 || nt == 0 || nc == 0) return out;

  Eigen::MatrixXd r(n, p);
  for (size_t j = 0; j < p; ++j)
    for (size_t i = 0; i < n; ++i) r(i, j) = ranked[j][i];

  Eigen::RowVectorXd means = r.colwise().mean();
  Eigen::MatrixXd centered = r.rowwise() - means;
  Eigen::MatrixXd cv = centered.transpose() * centered / static_cast<double>(n - 1);

  // Rescale the diagonal to the variance of n untied ranks, limiting the
  // influence of ties and outliers alike.
  double untied = static_cast<double>(n) * (static_cast<double>(n) + 1.0) / 12.0;
  Eigen::VectorXd scale(p);
  for (size_t j = 0; j < p; ++j) scale(j) = std::sqrt(untied / cv(j, j));
  cv = scale.asDiagonal() * cv * scale.asDiagonal();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(cv);
  if (!lu.isInvertible()) {
    cv += (1e-8 * cv.trace()) * Eigen::MatrixXd::Identity(p, p);
    lu.compute(cv);
    out.ridge_applied = true;
  }
  Eigen::MatrixXd inv = lu.inverse();

  for (size_t i = 0; i < nt; ++i)
    for (size_t j = 0; j < nc; ++j) {
      Eigen::VectorXd diff = r.row(i) - r.row(nt + j);
      out.at(i, j) = diff.dot(inv * diff);
    }
  return out;
}

std::vector<std::vector<double>> gather(const std::vector<const Unit*>& units,
                                        const std::vector<int>& cov_indices) {
  std::vector<std::vector<double>> rows;
  rows.reserve(units.size());
  for (const Unit* u : units) {
    std::vector<double> row;
    row.reserve(cov_indices.size());
    for (int j : cov_indices) row.push_back(u->covariates[j]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<double>> gather(const std::vector<const Cluster*>& clusters,
                                        const std::vector<int>& cov_indices) {
  std::vector<std::vector<double>> rows;
  rows.reserve(clusters.size());
  for (const Cluster* c : clusters) {
    std::vector<double> row;
    row.reserve(cov_indices.size());
    for (int j : cov_indices) row.push_back(c->covariates[j]);
    rows.push_back(std::move(row));
  }
  return rows;
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

CsvTable DistanceMatrix::to_csv() const {
  CsvTable t;
  t.header.push_back("treated_unit");
  for (const auto& id : col_ids) t.header.push_back(id);
  for (size_t r = 0; r < rows(); ++r) {
    std::vector<std::string> row{row_ids[r]};
    for (size_t c = 0; c < cols(); ++c) row.push_back(format_number(at(r, c)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

DistanceMatrix robust_mahalanobis(const std::vector<const Unit*>& treated,
                                  const std::vector<const Unit*>& control,
                                  const std::vector<int>& cov_indices) {
  std::vector<std::string> names, rid, cid;
  for (int j : cov_indices) names.push_back(std::to_string(j));
  for (const Unit* u : treated) rid.push_back(u->unit_id);
  for (const Unit* u : control) cid.push_back(u->unit_id);
  return rank_mahalanobis(gather(treated, cov_indices), gather(control, cov_indices), names,
                          std::move(rid), std::move(cid));
}

DistanceMatrix robust_mahalanobis_clusters(const std::vector<const Cluster*>& treated,
                                           const std::vector<const Cluster*>& control,
                                           const std::vector<int>& cov_indices) {
  std::vector<std::string> names, rid, cid;
  for (int j : cov_indices) names.push_back(std::to_string(j));
  for (const Cluster* c : treated) rid.push_back(c->cluster_id);
  for (const Cluster* c : control) cid.push_back(c->cluster_id);
  return rank_mahalanobis(gather(treated, cov_indices), gather(control, cov_indices), names,
                          std::move(rid), std::move(cid));
}

PropensityScores estimate_propensity(const Dataset& data, Level level,
                                     const std::vector<int>& cov_indices) {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  if (level == Level::unit) {
    for (const auto& cl : data.clusters)
      for (const auto& u : cl.units) {
        std::vector<double> row;
        for (int j : cov_indices) row.push_back(u.covariates[j]);
        rows.push_back(std::move(row));
        y.push_back(cl.treated ? 1.0 : 0.0);
      }
  } else {
    for (const auto& cl : data.clusters) {
      std::vector<double> row;
      for (int j : cov_indices) row.push_back(cl.covariates[j]);
      rows.push_back(std::move(row));
      y.push_back(cl.treated ? 1.0 : 0.0);
    }
  }
  size_t n = rows.size(), p = cov_indices.size() + 1;

  Eigen::MatrixXd x_full(n, p);
  for (size_t i = 0; i < n; ++i) {
    x_full(i, 0) = 1.0;
    for (size_t j = 1; j < p; ++j) x_full(i, j) = rows[i][j - 1];
  }
  // Drop collinear columns (the intercept always survives: a pivoted QR
  // keeps the earliest independent set only up to permutation, so select
  // greedily instead).
  std::vector<int> kept;
  {
    Eigen::MatrixXd accum(n, p);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    for (size_t j = 0; j < p; ++j) {
      accum.col(kept.size()) = x_full.col(j);
      qr.compute(accum.leftCols(kept.size() + 1));
      if (qr.rank() == static_cast<Eigen::Index>(kept.size() + 1))
        kept.push_back(static_cast<int>(j));
    }
  }
  Eigen::MatrixXd x(n, kept.size());
  for (size_t j = 0; j < kept.size(); ++j) x.col(j) = x_full.col(kept[j]);

  Eigen::VectorXd yv(n);
  for (size_t i = 0; i < n; ++i) yv(i) = y[i];
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kept.size());

  PropensityScores out;
  out.converged = false;
  double prev_ll = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd prob(n);
  for (int iter = 0; iter < 25; ++iter) {
    Eigen::VectorXd eta = x * beta;
    double ll = 0;
    for (size_t i = 0; i < n; ++i) {
      double e = std::clamp(eta(i), -30.0, 30.0);
      prob(i) = 1.0 / (1.0 + std::exp(-e));
      double pc = std::clamp(prob(i), 1e-12, 1.0 - 1e-12);
      ll += yv(i) * std::log(pc) + (1.0 - yv(i)) * std::log(1.0 - pc);
    }
    if (std::abs(ll - prev_ll) < 1e-8 * (std::abs(prev_ll) + 1.0)) {
      out.converged = true;
      break;
    }
    prev_ll = ll;
    Eigen::VectorXd w = prob.array() * (1.0 - prob.array()) + 1e-10;
    Eigen::VectorXd z = x * beta + (yv - prob).cwiseQuotient(w);
    Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    beta = (xtw * x).ldlt().solve(xtw * z);
  }

  Eigen::VectorXd eta = x * beta;
  out.values.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double e = std::clamp(eta(i), -30.0, 30.0);
    out.values[i] = std::clamp(1.0 / (1.0 + std::exp(-e)), 1e-6, 1.0 - 1e-6);
  }
  out.coefficients.assign(p, 0.0);
  for (size_t j = 0; j < kept.size(); ++j) out.coefficients[kept[j]] = beta(j);
  out.sd = sample_sd(out.values);
  return out;
}

DistanceMatrix apply_caliper(DistanceMatrix matrix, const std::vector<double>& row_scores,
                             const std::vector<double>& col_scores, double width,
                             double score_sd) {
  if (!(width > 0)) throw config_error("caliper width must be positive");
  if (row_scores.size() != matrix.rows() || col_scores.size() != matrix.cols())
    throw config_error("caliper scores do not match the distance matrix shape");
  if (score_sd <= 0) return matrix;  // no spread, no gap can exceed the width
  for (size_t r = 0; r < matrix.rows(); ++r)
    for (size_t c = 0; c < matrix.cols(); ++c) {
      double excess = std::abs(row_scores[r] - col_scores[c]) - width * score_sd;
      if (excess > 0) matrix.at(r, c) += kCaliperPenalty * (excess / score_sd);
    }
  return matrix;
}

}  // namespace multimatch
