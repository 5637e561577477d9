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


#include "netdp/unsup_embed.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "netdp/binary_io.h"

namespace netdp {
namespace {

void CheckPairInputs(std::span<const double> ui, std::span<const double> uj,
                     std::span<const std::span<const double>> negs) {
  if (negs.empty()) throw InvalidArgument("pair loss needs at least one negative");
  if (ui.size() != uj.size()) throw InvalidArgument("pair loss: dimension mismatch");
  if (!AllFinite(ui) || !AllFinite(uj)) {
    throw NonFiniteError("pair loss: non-finite input");
  }
  for (const auto& n : negs) {
    if (n.size() != ui.size()) throw InvalidArgument("pair loss: dimension mismatch");
    if (!AllFinite(n)) throw NonFiniteError("pair loss: non-finite input");
  }
}

// d(loss)/d(ui.uk) for one negative term.
double NegCoefficient(double x, NegLossForm form) {
  return form == NegLossForm::kStandard ? Sigmoid(x) : Sigmoid(x) - 1.0;
}

double NegTerm(double x, NegLossForm form) {
  return form == NegLossForm::kStandard ? -LogSigmoid(-x) : -LogSigmoid(x);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t rows, std::size_t dim,
                               std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (values_.size() != rows * dim) {
    throw InvalidArgument("EmbeddingTable: value count does not match shape");
  }
}

void EmbeddingTable::Save(const std::filesystem::path& path,
                          std::span<const std::string> raw_ids) const {
  if (raw_ids.size() != rows_) {
    throw InvalidArgument("EmbeddingTable::Save: raw id count mismatch");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  BinaryWriter w(path);
  w.WriteBytes("NDPE");
  w.WriteU32(kFormatVersion);
  w.WriteU64(rows_);
  w.WriteU64(dim_);
  for (double x : values_) w.WriteF32(static_cast<float>(x));
  w.Close();

  std::ofstream index(path.string() + ".index");
  for (std::size_t i = 0; i < rows_; ++i) index << i << '\t' << raw_ids[i] << '\n';
  if (!index) throw DataError("cannot write " + path.string() + ".index");
}

EmbeddingTable EmbeddingTable::Load(const std::filesystem::path& path,
                                    std::vector<std::string>* raw_ids) {
  BinaryReader r(path);
  r.ExpectHeader("NDPE", kFormatVersion);
  const auto rows = r.ReadU64();
  const auto dim = r.ReadU64();
  if (dim == 0 || rows > (std::uint64_t{1} << 40) / dim) {
    throw DataError("embedding header is corrupt: " + path.string());
  }
  std::vector<double> values(rows * dim);
  for (auto& x : values) x = r.ReadF32();
  if (raw_ids) {
    raw_ids->assign(rows, std::string());
    std::ifstream index(path.string() + ".index");
    if (!index) throw DataError("missing embedding index for " + path.string());
    std::string line;
    std::size_t seen = 0;
    while (std::getline(index, line)) {
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("bad embedding index line: " + line);
      const auto dense = std::stoull(line.substr(0, tab));
      if (dense >= rows) throw DataError("embedding index id out of range");
      (*raw_ids)[dense] = line.substr(tab + 1);
      ++seen;
    }
    if (seen != rows) throw DataError("embedding index is incomplete");
  }
  return EmbeddingTable(rows, dim, std::move(values));
}

double PairLoss(std::span<const double> ui, std::span<const double> uj,
                std::span<const std::span<const double>> negs,
                NegLossForm form) {
  CheckPairInputs(ui, uj, negs);
  double loss = -LogSigmoid(Dot(ui, uj));
  for (const auto& uk : negs) loss += NegTerm(Dot(ui, uk), form);
  return loss;
}

PairGradients PairGradient(std::span<const double> ui,
                           std::span<const double> uj,
                           std::span<const std::span<const double>> negs,
                           NegLossForm form) {
  CheckPairInputs(ui, uj, negs);
  const std::size_t d = ui.size();
  PairGradients g;
  g.grad_i.assign(d, 0.0);
  g.grad_j.assign(d, 0.0);
  // d/dx of -log s(x) is s(x) - 1.
  const double cj = Sigmoid(Dot(ui, uj)) - 1.0;
  for (std::size_t t = 0; t < d; ++t) {
    g.grad_i[t] += cj * uj[t];
    g.grad_j[t] = cj * ui[t];
  }
  for (const auto& uk : negs) {
    const double ck = NegCoefficient(Dot(ui, uk), form);
    std::vector<double> gk(d);
    for (std::size_t t = 0; t < d; ++t) {
      g.grad_i[t] += ck * uk[t];
      gk[t] = ck * ui[t];
    }
    g.grad_negs.push_back(std::move(gk));
  }
  return g;
}

double PairSgdStep(double* ui, double* uj, std::span<double* const> negs,
                   std::size_t dim, double lr, NegLossForm form,
                   std::vector<double>& scratch) {
  scratch.resize(2 * dim + negs.size());
  double* ui_old = scratch.data();
  double* grad_i = ui_old + dim;
  double* coef = grad_i + dim;
  std::copy(ui, ui + dim, ui_old);

  const double xj = Dot({ui_old, dim}, {uj, dim});
  double loss = -LogSigmoid(xj);
  const double cj = Sigmoid(xj) - 1.0;
  for (std::size_t t = 0; t < dim; ++t) grad_i[t] = cj * uj[t];
  for (std::size_t k = 0; k < negs.size(); ++k) {
    const double xk = Dot({ui_old, dim}, {negs[k], dim});
    loss += NegTerm(xk, form);
    coef[k] = NegCoefficient(xk, form);
    for (std::size_t t = 0; t < dim; ++t) grad_i[t] += coef[k] * negs[k][t];
  }
  for (std::size_t t = 0; t < dim; ++t) uj[t] -= lr * cj * ui_old[t];
  for (std::size_t k = 0; k < negs.size(); ++k) {
    for (std::size_t t = 0; t < dim; ++t) negs[k][t] -= lr * coef[k] * ui_old[t];
  }
  for (std::size_t t = 0; t < dim; ++t) ui[t] -= lr * grad_i[t];
  return loss;
}

void UnsupConfig::Validate() const {
  if (dim == 0 || neighbors_per_step == 0 || negatives == 0 || batch_size == 0 ||
      num_workers == 0) {
    throw InvalidArgument("unsup config: sizes must be positive");
  }
  if (!(learning_rate > 0.0)) throw InvalidArgument("unsup config: lr must be > 0");
  if (init_scale < 0.0) throw InvalidArgument("unsup config: init_scale < 0");
}

ProbeSet MakeProbeSet(const PartitionedGraph& g, std::size_t pairs,
                      std::size_t negatives, std::uint64_t seed) {
  ProbeSet probe;
  probe.negatives_per_pair = negatives;
  std::vector<NodeId> sources;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.OutDegree(v) > 0) sources.push_back(v);
  }
  if (sources.empty() || pairs == 0) return probe;
  Rng rng(DeriveSeed(seed, 0x9b0be));
  for (std::size_t p = 0; p < pairs; ++p) {
    const NodeId v = sources[rng.UniformInt(sources.size())];
    const auto nbrs = g.Neighbors(v);
    probe.targets.push_back(v);
    probe.contexts.push_back(nbrs[rng.UniformInt(nbrs.size())]);
    for (std::size_t k = 0; k < negatives; ++k) {
      probe.negatives.push_back(g.SampleNegative(rng));
    }
  }
  return probe;
}

double ProbeLoss(const ProbeSet& probe, std::span<const double> table,
                 std::size_t dim, NegLossForm form) {
  if (probe.size() == 0) return 0.0;
  const std::size_t k = probe.negatives_per_pair;
  auto row = [&](NodeId v) { return table.subspan(v * dim, dim); };
  std::vector<std::span<const double>> negs(k);
  double total = 0.0;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    const auto ui = row(probe.targets[p]);
    double loss = -LogSigmoid(Dot(ui, row(probe.contexts[p])));
    for (std::size_t n = 0; n < k; ++n) {
      loss += NegTerm(Dot(ui, row(probe.negatives[p * k + n])), form);
    }
    total += loss;
  }
  return total / static_cast<double>(probe.size());
}

std::unique_ptr<ParamStore> MakeUnsupStore(const PartitionedGraph& g,
                                           const UnsupConfig& cfg) {
  cfg.Validate();
  auto store = std::make_unique<ParamStore>(g.num_nodes(), cfg.dim,
                                            g.num_shards(), UpdateMode::kAdd);
  store->InitializeUniform(cfg.EffectiveInitScale(), cfg.seed);
  return store;
}

UnsupResult TrainUnsup(const PartitionedGraph& g, ParamStore& store,
                       const UnsupConfig& cfg) {
  cfg.Validate();
  if (store.dim() != cfg.dim || store.num_keys() != g.num_nodes()) {
    throw InvalidArgument("TrainUnsup: store shape does not match graph/config");
  }
  const std::size_t d = cfg.dim;
  const ProbeSet probe = MakeProbeSet(g, cfg.probe_pairs, cfg.negatives, cfg.seed);

  UnsupResult result;
  const double initial = ProbeLoss(probe, store.Snapshot(), d, cfg.loss_form);
  result.probe_losses.push_back(initial);
  spdlog::info("train_unsup epoch=0 probe_loss={:.6f} nodes={} workers={}",
               initial, g.num_nodes(), cfg.num_workers);

  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> rejected{0};
  double best = initial;
  std::size_t since_best = 0;
  auto epoch_start = std::chrono::steady_clock::now();
  const std::uint64_t base_version = store.version();

  store.set_epoch_callback([&](std::uint64_t version) {
    const std::size_t epoch = version - base_version + 1;
    const double loss = ProbeLoss(probe, store.Snapshot(), d, cfg.loss_form);
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - epoch_start).count();
    epoch_start = now;
    result.probe_losses.push_back(loss);
    result.epochs_run = epoch;
    spdlog::info("train_unsup epoch={} probe_loss={:.6f} seconds={:.3f}", epoch,
                 loss, secs);
    if (!std::isfinite(loss)) {
      throw DivergenceError("train_unsup diverged at epoch " +
                            std::to_string(epoch) + ": probe loss is not finite");
    }
    if (cfg.early_stop_patience > 0) {
      if (loss < best * (1.0 - 1e-4)) {
        best = loss;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        spdlog::info("train_unsup early stop at epoch={}", epoch);
        stop = true;
      }
    }
  });

  // Linear decay is driven by per-worker progress through its own nodes.
  auto lr_at = [&](std::size_t epoch, double fraction) {
    if (!cfg.linear_decay) return cfg.learning_rate;
    const double progress =
        (static_cast<double>(epoch) + fraction) / static_cast<double>(cfg.max_epochs);
    return cfg.learning_rate * std::max(1e-4, 1.0 - progress);
  };

  auto workers = AssignWorkers(g.num_nodes(), cfg.num_workers, cfg.seed);
  RunWorkers(workers, store, [&](WorkerHandle& worker) {
    std::unordered_map<NodeId, std::uint32_t> local_index;
    std::vector<NodeId> keys;
    std::vector<double> local, pulled;
    std::vector<NodeId> pair_i, pair_j, pair_negs;
    std::vector<double*> neg_ptrs(cfg.negatives);
    std::vector<double> scratch;

    auto local_row = [&](NodeId v) {
      auto [it, inserted] =
          local_index.try_emplace(v, static_cast<std::uint32_t>(keys.size()));
      if (inserted) keys.push_back(v);
      return it->second;
    };

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
      if (stop) break;
      Rng rng = worker.EpochRng(epoch);
      const auto order = worker.ShuffledNodes(epoch);
      for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
        local_index.clear();
        keys.clear();
        pair_i.clear();
        pair_j.clear();
        pair_negs.clear();
        // Adjacency lookups and sampling for the whole batch.
        for (std::size_t b = begin; b < end; ++b) {
          const NodeId v = order[b];
          if (g.OutDegree(v) == 0) continue;
          const auto sampled = g.SampleNeighbors(v, cfg.neighbors_per_step, rng);
          for (NodeId u : sampled) {
            pair_i.push_back(local_row(v));
            pair_j.push_back(local_row(u));
            for (std::size_t k = 0; k < cfg.negatives; ++k) {
              pair_negs.push_back(local_row(g.SampleNegative(rng)));
            }
          }
        }
        if (keys.empty()) continue;
        local.resize(keys.size() * d);
        store.Pull(keys, local);
        pulled = local;
        const double lr =
            lr_at(epoch, static_cast<double>(begin) / static_cast<double>(order.size()));
        for (std::size_t p = 0; p < pair_i.size(); ++p) {
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            neg_ptrs[k] = local.data() + pair_negs[p * cfg.negatives + k] * d;
          }
          PairSgdStep(local.data() + pair_i[p] * d, local.data() + pair_j[p] * d,
                      neg_ptrs, d, lr, cfg.loss_form, scratch);
        }
        // Push deltas, not rows: a batch reaches most of the table through
        // its negatives, so whole-row writes would erase concurrent work.
        for (std::size_t i = 0; i < local.size(); ++i) local[i] -= pulled[i];
        try {
          store.Push(keys, local);
        } catch (const NonFiniteError&) {
          rejected.fetch_add(1);
          spdlog::warn("train_unsup worker={} rejected a non-finite batch",
                       worker.worker_id);
        }
      }
      store.Barrier(base_version + epoch);
    }
  });
  store.set_epoch_callback(nullptr);

  result.rejected_batches = rejected.load();
  result.table = EmbeddingTable(g.num_nodes(), d, store.Snapshot());
  return result;
}

}  // namespace netdp
