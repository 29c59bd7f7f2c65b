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

#ifndef MULTIMATCH_INFERENCE_HPP_
#define MULTIMATCH_INFERENCE_HPP_

#include <string>
#include <utility>
#include <vector>

#include "multimatch/dataset.hpp"
#include "multimatch/sample.hpp"

namespace multimatch {

enum class WeightRule { constant, size_proportional };
enum class PValueMode { normal, exact };

// Pair-level scores for the randomization test. Cluster pairs without
// matched units carry no score and are dropped. The observed orientation
// lists treated first, so every B_k is +1 and T = sum Q_k.
struct ScoredSample {
  std::vector<double> B;        // sign of the observed assignment, +1 each
  std::vector<double> Q;        // w_k * (mean q treated side - mean q control side)
  std::vector<double> weights;  // w_k
  std::vector<double> unit_scores;  // q per matched unit, canonical order
  double T = 0.0;
  double variance = 0.0;  // sum Q_k^2
  bool degenerate = false;        // variance is zero
  bool huber_converged = true;
};

// Matched units in canonical order: per cluster pair, the treated units of
// its unit pairs, then the control units. Outcomes of treated units are
// shifted down by tau0.
struct MatchedDesign {
  std::vector<double> outcomes;
  std::vector<std::vector<double>> covariates;  // regression rows, no intercept
  std::vector<int> pair_index;                  // cluster pair of each entry
  std::vector<char> treated;                    // arm of each entry
  std::vector<long> pair_units;                 // matched units per cluster pair, both arms
  std::vector<double> pair_weight_mass;         // total units in both clusters of the pair
};

MatchedDesign matched_design(const MatchedSample& sample, const Dataset& data,
                             double tau0 = 0.0);

// Ranks of the residuals from a Huber regression of outcome on intercept
// plus covariates (tuning constant 1.345 times the rescaled median absolute
// deviation). Ties take average ranks. Falls back to least squares after 50
// iterations without convergence, clearing *converged.
std::vector<double> huber_residual_ranks(const std::vector<double>& outcomes,
                                         const std::vector<std::vector<double>>& covariates,
                                         bool* converged = nullptr);

// Pair scores Q_k from unit scores q (canonical order) and the weight rule:
// constant weights are 1, size-proportional weights are the pair's share of
// total cluster size. T = sum B_k Q_k with B_k = +1.
ScoredSample cluster_statistic(const MatchedSample& sample, const Dataset& data,
                               const std::vector<double>& q, WeightRule rule);

// Convenience: design, Huber ranks and pair scores in one step, with the
// treated outcomes shifted by tau0.
ScoredSample score_sample(const MatchedSample& sample, const Dataset& data,
                          WeightRule rule, double tau0 = 0.0);

// One-sided upper p-value of T. Normal mode uses 1 - Phi(T / sd); exact
// mode enumerates the 2^K sign assignments and requires K <= 20. A
// degenerate sample yields p = 1.
double randomization_pvalue(const ScoredSample& scored, PValueMode mode);

// Worst-case upper-tail p-value when assignment odds within a pair are
// biased by at most gamma: each term is +|Q_k| with probability
// gamma / (1 + gamma). Normal mode evaluates the moment bound, exact mode
// enumerates. gamma = 1 reproduces randomization_pvalue exactly.
double sensitivity_bound(const ScoredSample& scored, double gamma, PValueMode mode);

// Shift estimate: the tau0 whose shifted statistic crosses its null
// expectation, located by bisection within +-10 outcome SDs. Scores are
// recomputed at every candidate shift. Throws data_error when the statistic
// never crosses zero in that range.
double hl_estimate(const MatchedSample& sample, const Dataset& data, WeightRule rule);

// Test-inversion interval: endpoints are the shifts where the one-sided
// normal p-values reach alpha / 2.
std::pair<double, double> confidence_interval(const MatchedSample& sample,
                                              const Dataset& data, WeightRule rule,
                                              double alpha);

// Two one-sided tests against tau <= -delta and tau >= +delta, each bounded
// at the given gamma; returns the larger p-value.
double equivalence_pvalue(const MatchedSample& sample, const Dataset& data,
                          WeightRule rule, double delta, double gamma, PValueMode mode);

struct GammaThreshold {
  double gamma_star = 1.0;
  bool exceeded_grid = false;    // no crossing below gamma = 100
  bool not_significant = false;  // already above alpha at gamma = 1
};

// Smallest gamma at which the bounded p-value exceeds alpha, by bisection
// on [1, 100] to a tolerance of 0.01. delta <= 0 selects the point null,
// delta > 0 the equivalence test at that margin.
GammaThreshold gamma_threshold(const MatchedSample& sample, const Dataset& data,
                               WeightRule rule, double alpha, double delta,
                               PValueMode mode);

struct InferenceResult {
  double T = 0.0;
  double variance = 0.0;
  double p_one_sided = 1.0;
  double tau_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
  int n_cluster_pairs = 0;
  long n_unit_pairs = 0;
  bool degenerate = false;
  bool huber_converged = true;
  bool estimable = true;  // false when the statistic never crosses zero
  PValueMode mode = PValueMode::normal;
  WeightRule weight_rule = WeightRule::constant;
  std::vector<std::pair<double, double>> equivalence;  // margin, p-value
  std::vector<std::pair<double, double>> sensitivity;  // gamma, upper bound p
  GammaThreshold gamma_star;
};

struct InferenceOptions {
  WeightRule weight_rule = WeightRule::constant;
  double alpha = 0.05;
  std::vector<double> deltas;      // equivalence margins on the outcome scale
  std::vector<double> gamma_grid;  // sweep points; default 1 to 3 by 0.1
  bool exact_when_small = true;    // exact p-values when K <= 20
};

// Full report: point null, shift estimate with interval, equivalence tests
// at each margin, sensitivity sweep and the crossing gamma.
InferenceResult analyze_sample(const MatchedSample& sample, const Dataset& data,
                               const InferenceOptions& options);

std::string inference_json(const InferenceResult& result);
std::string inference_text(const InferenceResult& result);
CsvTable gamma_sweep_csv(const InferenceResult& result);

}  // namespace multimatch

#endif  // MULTIMATCH_INFERENCE_HPP_
