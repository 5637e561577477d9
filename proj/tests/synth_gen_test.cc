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


#include "netdp/synth_gen.h"

#include <cmath>

#include <gtest/gtest.h>

#include "netdp/eval.h"
#include "test_util.h"

namespace netdp {
namespace {

using testing::ReadFile;
using testing::TempDir;

PartitionedGraph Ingest(const SynthData& d) {
  std::vector<RawEdge> edges;
  for (auto [a, b] : d.edges) edges.push_back({SynthData::RawId(a), SynthData::RawId(b)});
  return IngestEdges(edges, {.num_shards = 2, .max_degree = 100000, .add_reverse_edges = true});
}

TEST(SynthConfigTest, DefaultRatesSpanOneToEightPercent) {
  SynthConfig cfg;
  const auto rates = cfg.EffectiveBlockRates();
  ASSERT_EQ(rates.size(), 4u);
  EXPECT_NEAR(rates.front(), 0.01, 1e-12);
  EXPECT_NEAR(rates.back(), 0.08, 1e-12);
  EXPECT_LT(rates[1], rates[2]);
}

TEST(SynthConfigTest, RejectsDegenerateConfigs) {
  SynthConfig cfg;
  cfg.block_default_rates = {0, 0, 0, 0};
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg = {};
  cfg.block_default_rates = {0.1, 0.2};
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg = {};
  cfg.group_fractions = {0.7, 0.3, 0.0};
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg = {};
  cfg.group_fractions = {0.5, 0.3, 0.1};
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg = {};
  cfg.p_in = cfg.p_out = 0.0;
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg = {};
  cfg.p_in = 1.5;
  EXPECT_THROW(cfg.Validate(), InvalidArgument);
  cfg = {};
  cfg.label_fraction = 0.0;
  EXPECT_THROW(GenerateSynthetic(cfg), InvalidArgument);
}

TEST(GenerateSyntheticTest, SameSeedWritesIdenticalFiles) {
  SynthConfig cfg;
  cfg.num_nodes = 3000;
  cfg.p_in = 0.02;
  TempDir a("synth_a"), b("synth_b"), c("synth_c");
  GenerateSynthetic(cfg).Write(a.path());
  GenerateSynthetic(cfg).Write(b.path());
  cfg.seed = 8;
  GenerateSynthetic(cfg).Write(c.path());
  for (const char* f : {"edges.tsv", "labels.csv", "groups.csv", "bench.csv", "blocks.csv"}) {
    EXPECT_EQ(ReadFile(a.path() / f), ReadFile(b.path() / f)) << f;
  }
  EXPECT_NE(ReadFile(a.path() / "edges.tsv"), ReadFile(c.path() / "edges.tsv"));
}

TEST(GenerateSyntheticTest, EdgeCountsMatchBlockPairExpectations) {
  SynthConfig cfg;
  cfg.num_nodes = 4000;
  cfg.num_blocks = 3;
  cfg.p_in = 0.01;
  cfg.p_out = 0.001;
  const auto d = GenerateSynthetic(cfg);
  std::vector<double> theta(d.num_nodes);
  for (std::size_t i = 0; i < d.num_nodes; ++i) {
    theta[i] = cfg.group_degree_multipliers[static_cast<int>(d.group[i])];
  }
  // mean and variance of the edge count per unordered block pair
  std::vector<double> mean(9, 0.0), var(9, 0.0), seen(9, 0.0);
  for (std::size_t u = 0; u < d.num_nodes; ++u) {
    for (std::size_t v = u + 1; v < d.num_nodes; ++v) {
      const auto a = std::min(d.block[u], d.block[v]), b = std::max(d.block[u], d.block[v]);
      const double p = std::min(1.0, (a == b ? cfg.p_in : cfg.p_out) * theta[u] * theta[v]);
      mean[a * 3 + b] += p;
      var[a * 3 + b] += p * (1 - p);
    }
  }
  for (auto [u, v] : d.edges) {
    ASSERT_LT(u, v);
    seen[std::min(d.block[u], d.block[v]) * 3 + std::max(d.block[u], d.block[v])] += 1;
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      const int k = a * 3 + b;
      EXPECT_LE(std::abs(seen[k] - mean[k]), 3 * std::sqrt(var[k]))
          << "blocks " << a << "," << b << " seen " << seen[k] << " expected " << mean[k];
    }
  }
}

TEST(GenerateSyntheticTest, BaseRatesHoldWithoutBoost) {
  SynthConfig cfg;
  cfg.num_nodes = 30000;
  cfg.p_in = 0.001;
  cfg.p_out = 0.0001;
  cfg.neighbor_boost = 1.0;
  cfg.individual_risk = 0.0;
  cfg.label_fraction = 1.0;
  cfg.block_default_rates = {0.05, 0.1, 0.2, 0.4};
  const auto d = GenerateSynthetic(cfg);
  std::vector<double> n(4, 0), pos(4, 0);
  for (const auto& l : d.labels) {
    const auto b = d.block[std::stoul(l.raw_id)];
    n[b] += 1;
    pos[b] += l.y;
  }
  for (int b = 0; b < 4; ++b) {
    const double r = cfg.block_default_rates[b];
    EXPECT_LE(std::abs(pos[b] / n[b] - r), 3 * std::sqrt(r * (1 - r) / n[b])) << "block " << b;
  }
}

TEST(GenerateSyntheticTest, GroupDegreesFollowMultipliers) {
  SynthConfig cfg;
  cfg.num_nodes = 8000;
  cfg.p_in = 0.02;
  cfg.p_out = 0.0005;
  const auto d = GenerateSynthetic(cfg);
  std::vector<double> deg(d.num_nodes, 0);
  for (auto [u, v] : d.edges) deg[u] += 1, deg[v] += 1;
  std::unordered_map<NodeId, std::string> groups;
  const auto g = Ingest(d);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    groups[v] = std::string(GroupName(d.group[std::stoul(g.RawId(v))]));
  }
  const auto stats = GroupNeighborStats(g, groups);
  ASSERT_EQ(stats.size(), 3u);
  EXPECT_EQ(stats[0].group, "active");
  EXPECT_GT(stats[0].mean_degree, 1.3 * stats[1].mean_degree);
  EXPECT_GT(stats[0].mean_degree, 1.3 * stats[2].mean_degree);
  EXPECT_LT(std::abs(stats[1].mean_degree - stats[2].mean_degree), 0.1 * stats[1].mean_degree);
}

TEST(GenerateSyntheticTest, NoBoostOneBlockGivesFlatLift) {
  SynthConfig cfg;
  cfg.num_nodes = 20000;
  cfg.num_blocks = 1;
  cfg.p_in = 0.001;
  cfg.neighbor_boost = 1.0;
  cfg.block_default_rates = {0.3};
  cfg.label_fraction = 1.0;
  const auto d = GenerateSynthetic(cfg);
  const auto g = Ingest(d);
  const auto lift = DefaultRateLift(g, ResolveLabels(d.labels, g), 3);
  const auto& zero = lift.buckets.front();
  for (const auto& b : lift.buckets) {
    const double r = zero.default_rate;
    const double se = std::sqrt(r * (1 - r) * (1.0 / b.nodes + 1.0 / zero.nodes));
    EXPECT_LE(std::abs(b.default_rate - r), 4 * se) << "bucket " << b.bucket;
  }
}

TEST(GenerateSyntheticTest, BoostMakesLiftMonotone) {
  SynthConfig cfg;
  cfg.num_nodes = 20000;
  cfg.p_in = 0.009;  // same expected degree as the 50k default
  cfg.p_out = 0.00025;
  const auto d = GenerateSynthetic(cfg);
  const auto g = Ingest(d);
  const auto lift = DefaultRateLift(g, ResolveLabels(d.labels, g), 5);
  ASSERT_EQ(lift.buckets.size(), 6u);
  for (std::size_t i = 1; i < lift.buckets.size(); ++i) {
    EXPECT_GT(lift.buckets[i].default_rate, lift.buckets[i - 1].default_rate) << "bucket " << i;
  }
}

TEST(GenerateSyntheticTest, LabelsCoverConnectedNodesAndSplitByPeriod) {
  SynthConfig cfg;
  cfg.num_nodes = 3000;
  cfg.p_in = 0.01;
  const auto d = GenerateSynthetic(cfg);
  const auto g = Ingest(d);
  for (const auto& l : d.labels) {
    ASSERT_TRUE(g.HasRawId(l.raw_id));
    EXPECT_EQ(l.split == Split::kTrain, l.period <= std::string(kLastTrainPeriod));
  }
  EXPECT_NO_THROW(ResolveLabels(d.labels, g).Validate());
  for (double b : d.bench) {
    EXPECT_GT(b, 0.0);
    EXPECT_LT(b, 1.0);
  }
}

}  // namespace
}  // namespace netdp
