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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "multimatch/ip.hpp"

namespace multimatch {
namespace {

// Dense random maximization with le rows sized so roughly half of the
// variables fit: the regime where branch and bound has real work to do.
IntegerProgram random_program(int n_vars, int n_rows, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.5, 3.0);
  std::uniform_real_distribution<double> gain(1.0, 5.0);

  IntegerProgram p;
  p.n_vars = n_vars;
  p.objective.resize(n_vars);
  for (double& g : p.objective) g = gain(rng);
  for (int r = 0; r < n_rows; ++r) {
    LinearConstraint row;
    double total = 0;
    for (int j = 0; j < n_vars; ++j) {
      double a = coef(rng);
      row.terms.emplace_back(j, a);
      total += a;
    }
    row.rel = Relation::le;
    row.rhs = 0.5 * total;
    p.add(std::move(row));
  }
  return p;
}

// Cardinality matching subproblem in its native form: one binary variable
// per candidate unit pair, degree rows, and a two-sided mean balance row
// whose tolerance scales with the number of selected pairs.
IntegerProgram matching_program(int nt, int nc, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> x(0.0, 1.0);
  std::vector<double> xt(nt), xc(nc);
  for (double& v : xt) v = x(rng);
  for (double& v : xc) v = x(rng);

  IntegerProgram p;
  p.n_vars = nt * nc;
  p.objective.assign(p.n_vars, 1.0);
  for (int t = 0; t < nt; ++t) {
    LinearConstraint deg;
    for (int c = 0; c < nc; ++c) deg.terms.emplace_back(t * nc + c, 1.0);
    deg.rhs = 1.0;
    p.add(std::move(deg));
  }
  for (int c = 0; c < nc; ++c) {
    LinearConstraint deg;
    for (int t = 0; t < nt; ++t) deg.terms.emplace_back(t * nc + c, 1.0);
    deg.rhs = 1.0;
    p.add(std::move(deg));
  }
  const double tol = 0.2;
  LinearConstraint upper, lower;
  for (int t = 0; t < nt; ++t)
    for (int c = 0; c < nc; ++c) {
      double diff = xt[t] - xc[c];
      upper.terms.emplace_back(t * nc + c, diff - tol);
      lower.terms.emplace_back(t * nc + c, -diff - tol);
    }
  p.add(std::move(upper));
  p.add(std::move(lower));
  return p;
}

void BM_SolveLp(benchmark::State& state) {
  IntegerProgram p = random_program(static_cast<int>(state.range(0)),
                                    static_cast<int>(state.range(0)) / 2, 11);
  for (auto _ : state) {
    Solution s = solve_lp(p);
    benchmark::DoNotOptimize(s.objective_value);
  }
}
BENCHMARK(BM_SolveLp)->Arg(20)->Arg(60)->Arg(120);

void BM_SolveIp(benchmark::State& state) {
  IntegerProgram p = random_program(static_cast<int>(state.range(0)),
                                    static_cast<int>(state.range(0)) / 2, 11);
  SolveOptions opts;
  opts.time_limit_seconds = 60;
  long nodes = 0;
  for (auto _ : state) {
    Solution s = solve_ip(p, opts);
    nodes = s.nodes;
    benchmark::DoNotOptimize(s.objective_value);
  }
  state.counters["nodes"] = static_cast<double>(nodes);
}
BENCHMARK(BM_SolveIp)->Arg(12)->Arg(18)->Arg(24);

void BM_SolveIpMatching(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  IntegerProgram p = matching_program(n, n, 7);
  SolveOptions opts;
  opts.time_limit_seconds = 60;
  long nodes = 0;
  for (auto _ : state) {
    Solution s = solve_ip(p, opts);
    nodes = s.nodes;
    benchmark::DoNotOptimize(s.objective_value);
  }
  state.counters["nodes"] = static_cast<double>(nodes);
}
BENCHMARK(BM_SolveIpMatching)->Arg(6)->Arg(10)->Arg(14);

void BM_RelaxAndRound(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  IntegerProgram p = matching_program(n, n, 7);
  for (auto _ : state) {
    Solution s = relax_and_round(p);
    benchmark::DoNotOptimize(s.objective_value);
  }
}
BENCHMARK(BM_RelaxAndRound)->Arg(6)->Arg(10)->Arg(14);

}  // namespace
}  // namespace multimatch
