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

#include "multimatch/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "multimatch/errors.hpp"

namespace multimatch {
namespace {

constexpr double kTreatmentSlope = 0.4;   // cluster covariates -> treatment odds
constexpr double kOutcomeSlope = 0.25;    // unit covariates -> outcome

std::string padded(const char* prefix, int i, int width) {
  std::string n = std::to_string(i);
  std::string out = prefix;
  for (int k = static_cast<int>(n.size()); k < width; ++k) out += '0';
  return out + n;
}

void validate(const SimulateParams& p) {
  if (p.treated_clusters < 1 || p.control_clusters < 1)
    throw config_error("simulation needs at least one cluster per arm");
  if (p.units_per_cluster < 1) throw config_error("units_per_cluster must be positive");
  if (p.covariate_dims < 1) throw config_error("covariate_dims must be positive");
  if (!(p.icc >= 0.0 && p.icc < 1.0)) throw config_error("icc must lie in [0, 1)");
}

}  // namespace

SimulatedStudy simulate_study(const SimulateParams& params) {
  validate(params);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);

  int k = params.treated_clusters + params.control_clusters;
  int d = params.covariate_dims;

  std::vector<std::vector<double>> w(k, std::vector<double>(d));
  std::vector<double> assign_score(k);
  for (int c = 0; c < k; ++c) {
    double lin = 0.0;
    for (int j = 0; j < d; ++j) {
      w[c][j] = gauss(rng);
      lin += kTreatmentSlope * w[c][j];
    }
    // Gumbel noise turns the logistic score into an exact-size draw: the
    // top treated_clusters scores form a conditional logit sample.
    assign_score[c] = lin - std::log(-std::log(unif(rng)));
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return assign_score[a] > assign_score[b];
  });
  std::vector<char> treated(k, 0);
  for (int i = 0; i < params.treated_clusters; ++i) treated[order[i]] = 1;

  SimulatedStudy study;
  study.clusters.header = {"cluster_id", "treated"};
  for (int j = 1; j <= d; ++j) study.clusters.header.push_back("w" + std::to_string(j));
  study.units.header = {"unit_id", "cluster_id"};
  for (int j = 1; j <= d; ++j) study.units.header.push_back("x" + std::to_string(j));
  study.units.header.push_back("y");

  double sd_between = std::sqrt(params.icc);
  double sd_within = std::sqrt(1.0 - params.icc);
  int id_width = static_cast<int>(std::to_string(k).size());
  int unit_width = static_cast<int>(std::to_string(params.units_per_cluster).size());
  for (int c = 0; c < k; ++c) {
    std::string cid = padded("s", c + 1, id_width);
    std::vector<std::string> row{cid, treated[c] ? "1" : "0"};
    for (int j = 0; j < d; ++j) row.push_back(format_number(w[c][j]));
    study.clusters.rows.push_back(std::move(row));

    double cluster_effect = sd_between * gauss(rng);
    for (int u = 1; u <= params.units_per_cluster; ++u) {
      std::vector<std::string> urow{cid + padded("u", u, unit_width), cid};
      double y = cluster_effect + (treated[c] ? params.effect : 0.0);
      for (int j = 0; j < d; ++j) {
        double x = gauss(rng);
        y += kOutcomeSlope * x;
        urow.push_back(format_number(x));
      }
      y += sd_within * gauss(rng);
      urow.push_back(format_number(y));
      study.units.rows.push_back(std::move(urow));
    }
  }

  for (int j = 1; j <= d; ++j) {
    CovariateSchema cov;
    cov.name = "w" + std::to_string(j);
    cov.kind = Kind::continuous;
    cov.level = Level::cluster;
    cov.role = Role::balance;
    study.schema.push_back(cov);
  }
  for (int j = 1; j <= d; ++j) {
    CovariateSchema cov;
    cov.name = "x" + std::to_string(j);
    cov.kind = Kind::continuous;
    cov.level = Level::unit;
    cov.role = Role::balance;
    study.schema.push_back(cov);
  }
  CovariateSchema y;
  y.name = "y";
  y.kind = Kind::continuous;
  y.level = Level::unit;
  y.role = Role::outcome;
  study.schema.push_back(y);
  return study;
}

}  // namespace multimatch
