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


#ifndef NETDP_SUP_EMBED_H_
#define NETDP_SUP_EMBED_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "netdp/common.h"
#include "netdp/graph_store.h"
#include "netdp/labels.h"
#include "netdp/param_store.h"
#include "netdp/unsup_embed.h"

namespace netdp {

inline constexpr double kPredictionClamp = 1e-7;

// Trainable state of the neighbor-aggregation classifier.
struct SupervisedParams {
  std::size_t k = 0;
  std::size_t steps = 0;
  double lambda = 0.0;
  // Per-node free vectors fed to the first aggregation step.
  EmbeddingTable base;
  // k x k, row-major.
  std::vector<double> w1;
  std::vector<double> w2;

  double SquaredNorm() const;
};

struct AggregationDiagnostics {
  std::atomic<std::uint64_t> isolated_fallbacks{0};
  std::atomic<std::uint64_t> clamped_predictions{0};
};

// sigmoid(W1 * mean_{j in N(v)} prev[j]), elementwise sigmoid. Nodes without
// out-neighbors fall back to sigmoid(W1 * prev[v]).
std::vector<double> AggregateStep(NodeId v, const EmbeddingTable& prev,
                                  std::span<const double> w1,
                                  const PartitionedGraph& g,
                                  AggregationDiagnostics* diag = nullptr);

// sigmoid(w2 . u)
double PredictDefault(std::span<const double> u, std::span<const double> w2);

// Summed binary cross-entropy plus lambda * squared L2 norm of all
// parameters. Predictions are clamped to [eps, 1 - eps]; each clamp is
// counted in `clamped`.
double SupLoss(std::span<const double> preds, std::span<const int> labels,
               const SupervisedParams& params, std::uint64_t* clamped = nullptr);

struct SupGradients {
  std::vector<double> base;  // N x k
  std::vector<double> w1;
  std::vector<double> w2;
};

// Analytic gradient of SupLoss over `records`, full neighborhoods, at
// `params`.
SupGradients SupFullGradient(const PartitionedGraph& g,
                             std::span<const LabeledRecord> records,
                             const SupervisedParams& params);

// Predictions for `nodes` with full neighborhoods.
std::vector<double> PredictNodes(const PartitionedGraph& g,
                                 const SupervisedParams& params,
                                 std::span<const NodeId> nodes);

// Final-step representations of `nodes` (row i for nodes[i]), full
// neighborhoods.
EmbeddingTable RepresentNodes(const PartitionedGraph& g,
                              const SupervisedParams& params,
                              std::span<const NodeId> nodes);

struct SupConfig {
  std::size_t k = 32;
  std::size_t steps = 2;
  std::size_t epochs = 10;
  double learning_rate = 0.01;
  // Step multiplier for the shared W1 and w2, whose batch gradient sums
  // over every example; 0 selects 1 / batch_size.
  double dense_lr_scale = 0.0;
  // Decay the step linearly to zero over the run.
  bool linear_decay = false;
  double lambda = 1e-5;
  std::size_t fanout = 25;
  std::size_t batch_size = 32;
  std::size_t num_workers = 1;
  std::uint64_t seed = 1;
  // Half-width of the base-vector init; 0 selects 0.5 / k.
  double init_scale = 0.0;
  // Half-width of the W1 init; 0 selects 1 / sqrt(k).
  double w1_init_scale = 0.0;
  double w2_init_scale = 0.0;
  // Train nodes evaluated at every epoch barrier for divergence checks.
  std::size_t probe_nodes = 2000;

  double EffectiveInitScale() const {
    return init_scale > 0.0 ? init_scale : 0.5 / static_cast<double>(k);
  }
  double EffectiveW1Scale() const {
    return w1_init_scale > 0.0 ? w1_init_scale
                               : 1.0 / std::sqrt(static_cast<double>(k));
  }
  double EffectiveDenseScale() const {
    return dense_lr_scale > 0.0 ? dense_lr_scale : 1.0 / static_cast<double>(batch_size);
  }
  void Validate() const;
};

// Both stores take additive updates. Base vectors are keyed by node; W1 rows
// (keys 0..k-1) and w2 (key k) share the small dense store.
struct SupStores {
  std::unique_ptr<ParamStore> base;
  std::unique_ptr<ParamStore> dense;
};

// `warm_start`, when given, seeds the base vectors (its dim must equal k).
SupStores MakeSupStores(const PartitionedGraph& g, const SupConfig& cfg,
                        const EmbeddingTable* warm_start = nullptr);

SupervisedParams ParamsFromStores(const SupStores& stores, const SupConfig& cfg);

struct SupResult {
  SupervisedParams params;
  std::vector<NodeId> nodes;
  std::vector<double> scores;
  // Entry 0 at initialization, entry e after epoch e (mean probe loss).
  std::vector<double> probe_losses;
  std::uint64_t isolated_fallbacks = 0;
  std::uint64_t rejected_batches = 0;
};

// Mini-batch SGD over labeled train nodes with sampled neighborhoods, then
// scores every labeled node (train and test) with full neighborhoods.
SupResult TrainSup(const PartitionedGraph& g, const LabeledSet& labels,
                   SupStores& stores, const SupConfig& cfg);

}  // namespace netdp

#endif  // NETDP_SUP_EMBED_H_
