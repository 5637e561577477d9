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


#ifndef NETDP_PIPELINE_H_
#define NETDP_PIPELINE_H_

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "netdp/ensemble.h"
#include "netdp/eval.h"
#include "netdp/graph_store.h"
#include "netdp/labels.h"
#include "netdp/sup_embed.h"
#include "netdp/synth_gen.h"
#include "netdp/unsup_embed.h"

namespace netdp {

// A failure inside one pipeline stage; what() is prefixed with the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Runs `fn`, rethrowing any exception as a StageError tagged with `stage`.
template <typename Fn>
auto RunStage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Feature matrix and labels assembled from on-disk artifacts keyed by raw
// id. Node ids are embedding row indices.
struct EnsembleInputs {
  std::vector<std::string> raw_ids;
  EmbeddingTable embedding;
  std::vector<FeatureRow> rows;
  FeatureBuildStats stats;
};

// With no labels, every embedded node that has a supervised score gets an
// (unlabeled) row. `sup_emb_path`, when non-empty, names supervised representations to
// append to every feature row.
EnsembleInputs LoadEnsembleInputs(const std::filesystem::path& emb_path,
                                  const std::filesystem::path& sup_scores_path,
                                  const std::vector<RawLabel>& labels,
                                  const std::filesystem::path& sup_emb_path = {});

struct EnsembleTraining {
  EnsembleModel model;
  MartTrace trace;
  BlendSelection blend;
  bool has_bench = false;
};

// Fits MART on the train rows and, when bench scores are given, picks the
// blend weight by train-split KS. With blend_folds >= 2 the NetDP side of
// that KS uses out-of-fold forests, so an overfit forest does not crowd out
// the bench score; otherwise the final forest scores its own training rows.
EnsembleTraining TrainEnsemble(std::span<const FeatureRow> rows,
                               std::span<const std::string> raw_ids,
                               const MartConfig& mart,
                               const std::unordered_map<std::string, double>* bench,
                               double blend_step = 0.05, std::size_t blend_folds = 5);

// netdp, and with bench scores also bench and netdp_bench columns, for
// every row.
ScoreColumns PredictEnsemble(const EnsembleModel& model, std::span<const FeatureRow> rows,
                             std::span<const std::string> raw_ids,
                             const std::unordered_map<std::string, double>* bench);

std::unordered_map<std::string, double> ReadBenchScores(const std::filesystem::path& path);

// Replaces the train-split scores in `result` (from a model fitted on every
// train label) with cross-fitted ones: each train node is scored by a model
// that never saw its label. Test scores are left alone. Without this the
// ensemble learns from supervised scores that are optimistic on exactly the
// rows it is fitted on.
void CrossFitSupScores(const PartitionedGraph& g, const LabeledSet& labels,
                       const SupConfig& cfg, std::size_t folds, SupResult& result);

struct RunConfig {
  std::filesystem::path out_dir = "netdp_run";
  // Generate a synthetic dataset into out_dir/synth first.
  bool generate = true;
  // Inputs when generate == false.
  std::filesystem::path edges;
  std::filesystem::path labels;
  std::filesystem::path groups;
  std::filesystem::path bench;

  SynthConfig synth;
  IngestOptions ingest;
  // The stage defaults are tuned for a quick desk-scale run: far more
  // neighbor samples per epoch and larger steps than the trainers' own
  // defaults, which move very little in ten epochs from the small init.
  UnsupConfig unsup = [] {
    UnsupConfig c;
    c.neighbors_per_step = 25;
    c.learning_rate = 0.05;
    return c;
  }();
  SupConfig sup = [] {
    SupConfig c;
    c.learning_rate = 3.0;
    c.linear_decay = true;
    return c;
  }();
  MartConfig mart;
  // Cross-fitting folds for the train-split supervised scores; 0 or 1 keeps
  // the in-sample scores.
  std::size_t sup_folds = 5;
  double blend_step = 0.05;
  std::size_t blend_folds = 5;
  bool include_sup_embedding = false;
  bool per_period = true;
};

struct PipelineReport {
  EvaluationReport evaluation;
  LiftReport lift;
  std::vector<GroupStat> group_stats;
  double blend_weight = 1.0;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

// gen-synth (optional), ingest, train-unsup, train-sup, build-features,
// train-mart, blend, evaluate. Every artifact lands in cfg.out_dir; a stage
// failure raises StageError and leaves earlier artifacts in place.
PipelineReport RunPipeline(const RunConfig& cfg);

}  // namespace netdp

#endif  // NETDP_PIPELINE_H_
