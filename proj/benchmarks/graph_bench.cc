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


#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "netdp/common.h"
#include "netdp/graph_store.h"

namespace netdp {
namespace {

std::vector<RawEdge> RandomEdges(std::size_t nodes, std::size_t edges) {
  Rng rng(7);
  std::vector<RawEdge> out;
  out.reserve(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    out.push_back({std::to_string(rng.UniformInt(nodes)), std::to_string(rng.UniformInt(nodes))});
  }
  return out;
}

void BM_Ingest(benchmark::State& state) {
  const auto edges = RandomEdges(10000, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto g = IngestEdges(edges, {.num_shards = 4, .add_reverse_edges = true});
    benchmark::DoNotOptimize(g.num_edges());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ingest)->Arg(10000)->Arg(100000);

void BM_SampleNeighbors(benchmark::State& state) {
  const auto g = IngestEdges(RandomEdges(10000, 200000), {.num_shards = 4, .add_reverse_edges = true});
  Rng rng(1);
  NodeId v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.SampleNeighbors(v, 5, rng));
    v = (v + 1) % g.num_nodes();
  }
}
BENCHMARK(BM_SampleNeighbors);

void BM_SampleNegatives(benchmark::State& state) {
  const auto g = IngestEdges(RandomEdges(10000, 200000), {.num_shards = 4, .add_reverse_edges = true});
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(g.SampleNegatives(64, rng));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_SampleNegatives);

}  // namespace
}  // namespace netdp
