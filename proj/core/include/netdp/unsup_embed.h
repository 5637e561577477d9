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


#ifndef NETDP_UNSUP_EMBED_H_
#define NETDP_UNSUP_EMBED_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "netdp/common.h"
#include "netdp/graph_store.h"
#include "netdp/param_store.h"

namespace netdp {

// Dense row-major table of one d-dimensional vector per node.
class EmbeddingTable {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), values_(rows * dim, 0.0) {}
  EmbeddingTable(std::size_t rows, std::size_t dim, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<double> row(std::size_t i) {
    return std::span<double>(values_).subspan(i * dim_, dim_);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }
  const std::vector<double>& values() const { return values_; }

  // Header (magic, version, N, d) then N*d little-endian float32 values;
  // `<path>.index` lists `dense_id<TAB>raw_id` per row.
  void Save(const std::filesystem::path& path,
            std::span<const std::string> raw_ids) const;
  // Loads a table; raw ids from the sidecar index go to `raw_ids` if given.
  static EmbeddingTable Load(const std::filesystem::path& path,
                             std::vector<std::string>* raw_ids = nullptr);

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

enum class NegLossForm {
  // -log s(ui.uj) - sum_k log s(-ui.uk)
  kStandard,
  // The negative term with the sign as literally printed: -log s(+ui.uk).
  // Kept only for comparison runs.
  kLiteralSign,
};

// Negative-sampling loss of one (target, neighbor) pair.
double PairLoss(std::span<const double> ui, std::span<const double> uj,
                std::span<const std::span<const double>> negs,
                NegLossForm form = NegLossForm::kStandard);

struct PairGradients {
  std::vector<double> grad_i;
  std::vector<double> grad_j;
  std::vector<std::vector<double>> grad_negs;
};

PairGradients PairGradient(std::span<const double> ui,
                           std::span<const double> uj,
                           std::span<const std::span<const double>> negs,
                           NegLossForm form = NegLossForm::kStandard);

// One SGD step on a pair, in place. Gradients are evaluated at the incoming
// values before any row moves, so aliased rows (a negative equal to the
// target, say) get the sum of their role gradients. Returns the loss before
// the step. `scratch` is reused across calls.
double PairSgdStep(double* ui, double* uj, std::span<double* const> negs,
                   std::size_t dim, double lr, NegLossForm form,
                   std::vector<double>& scratch);

struct UnsupConfig {
  std::size_t dim = 64;
  std::size_t neighbors_per_step = 5;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  bool linear_decay = false;
  std::size_t max_epochs = 10;
  std::size_t batch_size = 512;
  // Half-width of the uniform init; 0 selects 0.5 / dim.
  double init_scale = 0.0;
  std::uint64_t seed = 1;
  std::size_t num_workers = 1;
  std::size_t probe_pairs = 1000;
  // Stop after this many epochs without probe-loss improvement; 0 = off.
  std::size_t early_stop_patience = 0;
  NegLossForm loss_form = NegLossForm::kStandard;

  double EffectiveInitScale() const {
    return init_scale > 0.0 ? init_scale : 0.5 / static_cast<double>(dim);
  }
  void Validate() const;
};

// Fixed (node, neighbor, negatives) triples used to track convergence.
struct ProbeSet {
  std::vector<NodeId> targets;
  std::vector<NodeId> contexts;
  // negatives.size() == targets.size() * k
  std::vector<NodeId> negatives;
  std::size_t negatives_per_pair = 0;

  std::size_t size() const { return targets.size(); }
};

ProbeSet MakeProbeSet(const PartitionedGraph& g, std::size_t pairs,
                      std::size_t negatives, std::uint64_t seed);

// Mean PairLoss over the probe set against a row-major table.
double ProbeLoss(const ProbeSet& probe, std::span<const double> table,
                 std::size_t dim, NegLossForm form = NegLossForm::kStandard);

struct UnsupResult {
  EmbeddingTable table;
  // Entry 0 is the loss at initialization; entry e after epoch e.
  std::vector<double> probe_losses;
  std::uint64_t rejected_batches = 0;
  std::size_t epochs_run = 0;
};

// Creates the add-mode embedding store for `g` and fills it with the
// configured uniform initialization.
std::unique_ptr<ParamStore> MakeUnsupStore(const PartitionedGraph& g,
                                           const UnsupConfig& cfg);

// Mini-batch SGD over the negative-sampling objective. Each worker owns a
// hash partition of the nodes, reshuffles it every epoch, and for every
// mini-batch pulls the rows it needs, updates local copies pair by pair and
// pushes the changes back as deltas. Workers meet at a store barrier after every epoch, where
// the probe loss is evaluated. Throws DivergenceError when the probe loss
// stops being finite.
UnsupResult TrainUnsup(const PartitionedGraph& g, ParamStore& store,
                       const UnsupConfig& cfg);

}  // namespace netdp

#endif  // NETDP_UNSUP_EMBED_H_
