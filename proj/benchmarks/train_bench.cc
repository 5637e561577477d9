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


#include <vector>

#include <benchmark/benchmark.h>

#include "netdp/common.h"
#include "netdp/param_store.h"
#include "netdp/unsup_embed.h"

namespace netdp {
namespace {

void BM_PairSgdStep(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kNegs = 5;
  Rng rng(3);
  std::vector<double> rows((2 + kNegs) * dim);
  for (auto& x : rows) x = rng.Uniform(-0.1, 0.1);
  std::vector<double*> negs;
  for (std::size_t k = 0; k < kNegs; ++k) negs.push_back(rows.data() + (2 + k) * dim);
  std::vector<double> scratch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(PairSgdStep(rows.data(), rows.data() + dim, negs, dim, 1e-4,
                                         NegLossForm::kStandard, scratch));
  }
}
BENCHMARK(BM_PairSgdStep)->Arg(16)->Arg(64)->Arg(256);

void BM_StorePushPull(benchmark::State& state) {
  constexpr std::size_t kKeys = 100000, kDim = 64, kBatch = 256;
  const auto mode = state.range(0) ? UpdateMode::kAdd : UpdateMode::kOverwrite;
  ParamStore store(kKeys, kDim, 4, mode);
  store.InitializeZero();
  Rng rng(5);
  std::vector<ParamKey> keys(kBatch);
  std::vector<double> buf(kBatch * kDim, 0.5);
  for (auto _ : state) {
    for (auto& k : keys) k = rng.UniformInt(kKeys);
    store.Pull(keys, buf);
    store.Push(keys, buf);
  }
  state.SetItemsProcessed(state.iterations() * kBatch);
}
BENCHMARK(BM_StorePushPull)->Arg(0)->Arg(1);

}  // namespace
}  // namespace netdp
