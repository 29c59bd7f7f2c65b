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

#include <vector>

#include "multimatch/distance.hpp"
#include "multimatch/matcher.hpp"

#include "bench_util.hpp"

namespace multimatch {
namespace {

void BM_UnitDistanceMatrix(benchmark::State& state) {
  static const Dataset data = bench::make_study(4, 4, 60, 21);
  std::vector<const Unit*> treated = data.units_of(true);
  std::vector<const Unit*> control = data.units_of(false);
  std::vector<int> covs;
  for (size_t j = 0; j < data.unit_schema.size(); ++j)
    if (data.unit_schema[j].kind == Kind::numeric && data.unit_schema[j].role != Role::outcome)
      covs.push_back(static_cast<int>(j));
  int n = static_cast<int>(state.range(0));
  treated.resize(n);
  control.resize(n);
  for (auto _ : state) {
    DistanceMatrix m = robust_mahalanobis(treated, control, covs);
    benchmark::DoNotOptimize(m.d.data());
  }
}
BENCHMARK(BM_UnitDistanceMatrix)->Arg(40)->Arg(120)->Arg(240);

void BM_PairTable(benchmark::State& state) {
  static const Dataset data = bench::make_study(4, 6, 12, 22);
  static const BalanceSpec spec = bench::default_spec();
  MatcherOptions opts;
  opts.workers = static_cast<int>(state.range(0));
  long solved = 0;
  for (auto _ : state) {
    PairTable table = compute_pair_table(data, spec, DistanceConfig{}, opts);
    solved = table.solved_subproblems;
    benchmark::DoNotOptimize(table.m.data());
  }
  state.counters["subproblems"] = static_cast<double>(solved);
}
BENCHMARK(BM_PairTable)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_MultilevelMatch(benchmark::State& state) {
  static const Dataset data = bench::make_study(3, 5, 10, 23);
  static const BalanceSpec spec = bench::default_spec();
  MatcherOptions opts;
  opts.workers = 1;
  opts.lambda = 0.01;
  for (auto _ : state) {
    MatchRun run = multilevel_match(data, spec, DistanceConfig{}, opts);
    benchmark::DoNotOptimize(run.sample.cluster_pairs.data());
  }
}
BENCHMARK(BM_MultilevelMatch)->Unit(benchmark::kMillisecond);

void BM_MyopicCardinality(benchmark::State& state) {
  static const Dataset data = bench::make_study(3, 5, 10, 23);
  static const BalanceSpec spec = bench::default_spec();
  MatcherOptions opts;
  opts.workers = 1;
  for (auto _ : state) {
    MatchRun run = myopic_match(data, spec, DistanceConfig{}, opts, MyopicMode::cardinality);
    benchmark::DoNotOptimize(run.sample.cluster_pairs.data());
  }
}
BENCHMARK(BM_MyopicCardinality)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace multimatch
