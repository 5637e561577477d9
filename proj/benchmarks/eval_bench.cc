// Copyright 2026 The NetDP Authors.
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


#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "netdp/common.h"
#include "netdp/ensemble.h"
#include "netdp/eval.h"

namespace netdp {
namespace {

void BM_Ks(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(11);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.Uniform();
    labels[i] = rng.Bernoulli(0.1) ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(KsStatistic(scores, labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ks)->Arg(1000)->Arg(100000);

void BM_FindBestSplit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(13);
  std::vector<FeatureRow> data(n);
  std::vector<double> targets(n);
  std::vector<std::uint32_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i].x = {rng.Normal(), rng.Normal(), rng.Uniform(), rng.Normal()};
    targets[i] = rng.Normal();
    rows[i] = static_cast<std::uint32_t>(i);
  }
  for (auto _ : state) benchmark::DoNotOptimize(FindBestSplit(data, rows, targets, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FindBestSplit)->Arg(1000)->Arg(50000);

}  // namespace
}  // namespace netdp
