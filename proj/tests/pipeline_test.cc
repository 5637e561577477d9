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


#include "netdp/pipeline.h"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "test_util.h"

namespace netdp {
namespace {

using testing::ReadFile;
using testing::TempDir;

RunConfig SmallRun(const std::filesystem::path& out) {
  RunConfig cfg;
  cfg.out_dir = out;
  cfg.synth.num_nodes = 3000;
  cfg.synth.p_in = 0.05;
  cfg.synth.p_out = 0.001;
  cfg.synth.label_fraction = 0.5;
  cfg.unsup.dim = 16;
  cfg.unsup.max_epochs = 2;
  cfg.sup.k = 8;
  cfg.sup.epochs = 2;
  cfg.mart.num_trees = 20;
  cfg.sup_folds = 2;
  cfg.blend_folds = 2;
  return cfg;
}

TEST(PipelineTest, SmallRunWritesEveryArtifact) {
  TempDir dir("pipeline");
  const auto report = RunPipeline(SmallRun(dir.path()));
  for (const char* f : {"synth/edges.tsv", "graph/meta", "unsup.emb", "sup_scores.csv",
                        "model.bin", "predictions.csv", "report.csv", "report.txt", "lift.csv",
                        "group_stats.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  }
  for (const char* score : {"netdp", "bench", "netdp_bench"}) {
    const double ks = report.evaluation.Ks(score, "all");
    EXPECT_TRUE(ks >= 0.0 && ks <= 1.0) << score << " " << ks;
  }
  EXPECT_GE(report.blend_weight, 0.0);
  EXPECT_LE(report.blend_weight, 1.0);
  EXPECT_EQ(report.group_stats.size(), 3u);
  ASSERT_FALSE(report.lift.buckets.empty());
  EXPECT_EQ(report.lift.buckets[0].lift_percent, 0.0);
  // The saved model reproduces the written predictions.
  const auto labels = ReadLabelsCsv(dir.path() / "synth" / "labels.csv");
  const auto inputs = LoadEnsembleInputs(dir.path() / "unsup.emb", dir.path() / "sup_scores.csv", labels);
  const auto model = EnsembleModel::Load(dir.path() / "model.bin");
  const auto written = ReadScoresCsv(dir.path() / "predictions.csv").AsMap(0);
  for (std::size_t i = 0; i < inputs.rows.size(); ++i) {
    const auto& id = inputs.raw_ids[inputs.rows[i].node];
    EXPECT_NEAR(model.forest.Predict(inputs.rows[i].x), written.at(id), 1e-15);
  }
}

TEST(PipelineTest, SameSeedReproducesPredictions) {
  TempDir a("pipeline_a"), b("pipeline_b");
  RunPipeline(SmallRun(a.path()));
  RunPipeline(SmallRun(b.path()));
  EXPECT_EQ(ReadFile(a.path() / "predictions.csv"), ReadFile(b.path() / "predictions.csv"));
  EXPECT_EQ(ReadFile(a.path() / "model.bin"), ReadFile(b.path() / "model.bin"));
}

TEST(PipelineTest, MissingInputNamesTheStage) {
  TempDir dir("pipeline_missing");
  RunConfig cfg;
  cfg.out_dir = dir.path();
  cfg.generate = false;
  cfg.edges = dir.path() / "nope.tsv";
  cfg.labels = dir.path() / "nope.csv";
  try {
    RunPipeline(cfg);
    FAIL() << "expected a StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
}

TEST(RunStageTest, WrapsForeignExceptions) {
  try {
    RunStage("train-mart", []() -> int { throw DataError("bad rows"); });
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "train-mart");
    EXPECT_STREQ(e.what(), "train-mart: bad rows");
  }
}

TEST(CrossFitTest, TrainScoresComeFromHeldOutModels) {
  SynthConfig sc;
  sc.num_nodes = 2000;
  sc.p_in = 0.05;
  sc.label_fraction = 0.5;
  const auto data = GenerateSynthetic(sc);
  std::vector<RawEdge> edges;
  for (auto [u, v] : data.edges) edges.push_back({SynthData::RawId(u), SynthData::RawId(v)});
  const auto g = IngestEdges(edges, {.add_reverse_edges = true});
  const auto labels = ResolveLabels(data.labels, g);
  SupConfig cfg;
  cfg.k = 8;
  cfg.epochs = 2;
  cfg.learning_rate = 3.0;
  auto stores = MakeSupStores(g, cfg);
  auto result = TrainSup(g, labels, stores, cfg);
  const auto in_sample = result.scores;
  CrossFitSupScores(g, labels, cfg, 3, result);
  ASSERT_EQ(result.scores.size(), in_sample.size());
  ASSERT_TRUE(std::is_sorted(result.nodes.begin(), result.nodes.end()));
  std::unordered_map<NodeId, Split> split_of;
  for (const auto& r : labels.records) split_of[r.node] = r.split;
  std::size_t train_changed = 0;
  for (std::size_t i = 0; i < result.nodes.size(); ++i) {
    if (split_of.at(result.nodes[i]) == Split::kTest) {
      EXPECT_EQ(result.scores[i], in_sample[i]);
    } else {
      train_changed += result.scores[i] != in_sample[i];
      EXPECT_GT(result.scores[i], 0.0);
      EXPECT_LT(result.scores[i], 1.0);
    }
  }
  EXPECT_GT(train_changed, 0u);
}

}  // namespace
}  // namespace netdp
