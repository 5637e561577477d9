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


#include "netdp/sup_embed.h"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace netdp {
namespace {

// Layered receptive field of a set of target nodes. layers[steps] holds the
// targets, layers[0] the nodes whose base vectors are read. Node i of layer
// l >= 1 averages children[l][offsets[l][i] .. offsets[l][i + 1]), which
// index into layer l - 1.
struct ReceptiveField {
  std::size_t steps = 0;
  std::vector<std::vector<NodeId>> layers;
  std::vector<std::vector<std::uint32_t>> offsets;
  std::vector<std::vector<std::uint32_t>> children;
  // Position of each requested target within layers[steps].
  std::vector<std::uint32_t> target_index;
  std::uint64_t isolated = 0;
};

// fanout == 0 keeps full neighborhoods; otherwise lists longer than fanout
// are subsampled with `rng`.
ReceptiveField BuildField(const PartitionedGraph& g,
                          std::span<const NodeId> targets, std::size_t steps,
                          std::size_t fanout, Rng* rng) {
  ReceptiveField f;
  f.steps = steps;
  f.layers.resize(steps + 1);
  f.offsets.resize(steps + 1);
  f.children.resize(steps + 1);

  std::unordered_map<NodeId, std::uint32_t> index;
  auto& top = f.layers[steps];
  for (NodeId v : targets) {
    auto [it, inserted] = index.try_emplace(v, static_cast<std::uint32_t>(top.size()));
    if (inserted) top.push_back(v);
    f.target_index.push_back(it->second);
  }

  std::vector<NodeId> sampled;
  for (std::size_t l = steps; l >= 1; --l) {
    index.clear();
    auto& below = f.layers[l - 1];
    auto& offsets = f.offsets[l];
    auto& children = f.children[l];
    offsets.assign(1, 0);
    auto child = [&](NodeId u) {
      auto [it, inserted] =
          index.try_emplace(u, static_cast<std::uint32_t>(below.size()));
      if (inserted) below.push_back(u);
      children.push_back(it->second);
    };
    for (NodeId v : f.layers[l]) {
      const auto nbrs = g.Neighbors(v);
      if (nbrs.empty()) {
        ++f.isolated;
        child(v);
      } else if (fanout == 0 || nbrs.size() <= fanout) {
        for (NodeId u : nbrs) child(u);
      } else {
        sampled = g.SampleNeighbors(v, fanout, *rng);
        for (NodeId u : sampled) child(u);
      }
      offsets.push_back(static_cast<std::uint32_t>(children.size()));
    }
  }
  return f;
}

// out = W1 * in, W1 row-major k x k.
void MatVec(std::span<const double> w1, const double* in, double* out,
            std::size_t k) {
  for (std::size_t r = 0; r < k; ++r) {
    double s = 0.0;
    const double* row = w1.data() + r * k;
    for (std::size_t c = 0; c < k; ++c) s += row[c] * in[c];
    out[r] = s;
  }
}

struct Activations {
  // h[l]: layers[l].size() x k; m[l] the pre-transform means for l >= 1.
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> m;
  // One prediction per node of the top layer.
  std::vector<double> preds;
};

Activations Forward(const ReceptiveField& f, std::vector<double> base_rows,
                    std::span<const double> w1, std::span<const double> w2,
                    std::size_t k) {
  Activations a;
  a.h.resize(f.steps + 1);
  a.m.resize(f.steps + 1);
  a.h[0] = std::move(base_rows);
  std::vector<double> pre(k);
  for (std::size_t l = 1; l <= f.steps; ++l) {
    const std::size_t n = f.layers[l].size();
    auto& h = a.h[l];
    auto& m = a.m[l];
    h.assign(n * k, 0.0);
    m.assign(n * k, 0.0);
    const auto& below = a.h[l - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const auto begin = f.offsets[l][i];
      const auto end = f.offsets[l][i + 1];
      double* mi = m.data() + i * k;
      for (auto c = begin; c < end; ++c) {
        const double* hc = below.data() + f.children[l][c] * k;
        for (std::size_t t = 0; t < k; ++t) mi[t] += hc[t];
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t t = 0; t < k; ++t) mi[t] *= inv;
      MatVec(w1, mi, pre.data(), k);
      for (std::size_t t = 0; t < k; ++t) h[i * k + t] = Sigmoid(pre[t]);
    }
  }
  const auto& top = a.h[f.steps];
  const std::size_t n = f.layers[f.steps].size();
  a.preds.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.preds[i] = PredictDefault(std::span<const double>(top).subspan(i * k, k), w2);
  }
  return a;
}

// Backpropagates dz (d loss / d logit, one per top-layer node). Gradients
// are accumulated into the output vectors, which must be sized already.
void Backward(const ReceptiveField& f, const Activations& a,
              std::span<const double> dz, std::span<const double> w1,
              std::span<const double> w2, std::size_t k,
              std::vector<double>& d_base, std::vector<double>& d_w1,
              std::vector<double>& d_w2) {
  const std::size_t top_n = f.layers[f.steps].size();
  std::vector<double> dh(top_n * k, 0.0);
  const auto& top = a.h[f.steps];
  for (std::size_t i = 0; i < top_n; ++i) {
    if (dz[i] == 0.0) continue;
    for (std::size_t t = 0; t < k; ++t) {
      d_w2[t] += dz[i] * top[i * k + t];
      dh[i * k + t] = dz[i] * w2[t];
    }
  }
  std::vector<double> da(k), dm(k);
  for (std::size_t l = f.steps; l >= 1; --l) {
    const std::size_t n = f.layers[l].size();
    std::vector<double> dbelow(f.layers[l - 1].size() * k, 0.0);
    const auto& h = a.h[l];
    const auto& m = a.m[l];
    for (std::size_t i = 0; i < n; ++i) {
      bool any = false;
      for (std::size_t t = 0; t < k; ++t) {
        const double hv = h[i * k + t];
        da[t] = dh[i * k + t] * hv * (1.0 - hv);
        any = any || da[t] != 0.0;
      }
      if (!any) continue;
      const double* mi = m.data() + i * k;
      for (std::size_t r = 0; r < k; ++r) {
        double* gw = d_w1.data() + r * k;
        for (std::size_t c = 0; c < k; ++c) gw[c] += da[r] * mi[c];
      }
      std::fill(dm.begin(), dm.end(), 0.0);
      for (std::size_t r = 0; r < k; ++r) {
        const double* row = w1.data() + r * k;
        for (std::size_t c = 0; c < k; ++c) dm[c] += row[c] * da[r];
      }
      const auto begin = f.offsets[l][i];
      const auto end = f.offsets[l][i + 1];
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto c = begin; c < end; ++c) {
        double* dc = dbelow.data() + f.children[l][c] * k;
        for (std::size_t t = 0; t < k; ++t) dc[t] += dm[t] * inv;
      }
    }
    dh = std::move(dbelow);
  }
  for (std::size_t t = 0; t < dh.size(); ++t) d_base[t] += dh[t];
}

std::vector<double> GatherRows(const EmbeddingTable& table,
                               std::span<const NodeId> nodes) {
  const std::size_t k = table.dim();
  std::vector<double> out(nodes.size() * k);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto row = table.row(nodes[i]);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return out;
}

double ClampedBce(double p, int y, std::uint64_t* clamped) {
  if (p < kPredictionClamp || p > 1.0 - kPredictionClamp) {
    if (clamped) ++*clamped;
    p = std::clamp(p, kPredictionClamp, 1.0 - kPredictionClamp);
  }
  return y == 1 ? -std::log(p) : -std::log1p(-p);
}

}  // namespace

double SupervisedParams::SquaredNorm() const {
  double s = 0.0;
  for (double x : base.values()) s += x * x;
  for (double x : w1) s += x * x;
  for (double x : w2) s += x * x;
  return s;
}

std::vector<double> AggregateStep(NodeId v, const EmbeddingTable& prev,
                                  std::span<const double> w1,
                                  const PartitionedGraph& g,
                                  AggregationDiagnostics* diag) {
  const std::size_t k = prev.dim();
  if (w1.size() != k * k) throw InvalidArgument("AggregateStep: W1 must be k x k");
  std::vector<double> mean(k, 0.0);
  const auto nbrs = g.Neighbors(v);
  if (nbrs.empty()) {
    if (diag) diag->isolated_fallbacks.fetch_add(1, std::memory_order_relaxed);
    const auto self = prev.row(v);
    std::copy(self.begin(), self.end(), mean.begin());
  } else {
    for (NodeId u : nbrs) {
      const auto row = prev.row(u);
      for (std::size_t t = 0; t < k; ++t) mean[t] += row[t];
    }
    for (auto& x : mean) x /= static_cast<double>(nbrs.size());
  }
  std::vector<double> out(k);
  MatVec(w1, mean.data(), out.data(), k);
  for (auto& x : out) x = Sigmoid(x);
  return out;
}

double PredictDefault(std::span<const double> u, std::span<const double> w2) {
  if (u.size() != w2.size()) throw InvalidArgument("PredictDefault: dimension mismatch");
  return Sigmoid(Dot(w2, u));
}

double SupLoss(std::span<const double> preds, std::span<const int> labels,
               const SupervisedParams& params, std::uint64_t* clamped) {
  if (preds.size() != labels.size()) {
    throw InvalidArgument("SupLoss: preds and labels differ in length");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    loss += ClampedBce(preds[i], labels[i], clamped);
  }
  return loss + params.lambda * params.SquaredNorm();
}

SupGradients SupFullGradient(const PartitionedGraph& g,
                             std::span<const LabeledRecord> records,
                             const SupervisedParams& params) {
  const std::size_t k = params.k;
  std::vector<NodeId> targets;
  for (const auto& r : records) targets.push_back(r.node);
  const auto field = BuildField(g, targets, params.steps, 0, nullptr);
  const auto acts = Forward(field, GatherRows(params.base, field.layers[0]),
                            params.w1, params.w2, k);
  std::vector<double> dz(field.layers[params.steps].size(), 0.0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto t = field.target_index[i];
    dz[t] += acts.preds[t] - records[i].y;
  }
  std::vector<double> d_rows(field.layers[0].size() * k, 0.0);
  SupGradients grads;
  grads.w1.assign(k * k, 0.0);
  grads.w2.assign(k, 0.0);
  Backward(field, acts, dz, params.w1, params.w2, k, d_rows, grads.w1, grads.w2);

  grads.base.assign(params.base.values().size(), 0.0);
  for (std::size_t i = 0; i < field.layers[0].size(); ++i) {
    const NodeId v = field.layers[0][i];
    for (std::size_t t = 0; t < k; ++t) grads.base[v * k + t] += d_rows[i * k + t];
  }
  const double two_lambda = 2.0 * params.lambda;
  for (std::size_t i = 0; i < grads.base.size(); ++i) {
    grads.base[i] += two_lambda * params.base.values()[i];
  }
  for (std::size_t i = 0; i < grads.w1.size(); ++i) grads.w1[i] += two_lambda * params.w1[i];
  for (std::size_t i = 0; i < grads.w2.size(); ++i) grads.w2[i] += two_lambda * params.w2[i];
  return grads;
}

std::vector<double> PredictNodes(const PartitionedGraph& g,
                                 const SupervisedParams& params,
                                 std::span<const NodeId> nodes) {
  if (nodes.empty()) return {};
  const auto field = BuildField(g, nodes, params.steps, 0, nullptr);
  const auto acts = Forward(field, GatherRows(params.base, field.layers[0]),
                            params.w1, params.w2, params.k);
  std::vector<double> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = acts.preds[field.target_index[i]];
  return out;
}

EmbeddingTable RepresentNodes(const PartitionedGraph& g,
                              const SupervisedParams& params,
                              std::span<const NodeId> nodes) {
  const std::size_t k = params.k;
  EmbeddingTable out(nodes.size(), k);
  if (nodes.empty()) return out;
  const auto field = BuildField(g, nodes, params.steps, 0, nullptr);
  const auto acts = Forward(field, GatherRows(params.base, field.layers[0]),
                            params.w1, params.w2, k);
  const auto& top = acts.h[params.steps];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto t = field.target_index[i];
    std::copy(top.begin() + static_cast<std::ptrdiff_t>(t * k),
              top.begin() + static_cast<std::ptrdiff_t>((t + 1) * k), out.row(i).begin());
  }
  return out;
}

void SupConfig::Validate() const {
  if (k == 0 || steps == 0 || batch_size == 0 || num_workers == 0) {
    throw InvalidArgument("sup config: sizes must be positive");
  }
  if (!(learning_rate > 0.0)) throw InvalidArgument("sup config: lr must be > 0");
  if (lambda < 0.0) throw InvalidArgument("sup config: lambda must be >= 0");
}

SupStores MakeSupStores(const PartitionedGraph& g, const SupConfig& cfg,
                        const EmbeddingTable* warm_start) {
  cfg.Validate();
  SupStores s;
  s.base = std::make_unique<ParamStore>(g.num_nodes(), cfg.k, g.num_shards(),
                                        UpdateMode::kAdd);
  if (warm_start) {
    if (warm_start->dim() != cfg.k || warm_start->rows() != g.num_nodes()) {
      throw InvalidArgument("warm start table shape does not match (N, k)");
    }
    s.base->Initialize([&](ParamKey key, std::span<double> row) {
      const auto src = warm_start->row(key);
      std::copy(src.begin(), src.end(), row.begin());
    });
  } else {
    s.base->InitializeUniform(cfg.EffectiveInitScale(), DeriveSeed(cfg.seed, 0xba5e));
  }
  s.dense = std::make_unique<ParamStore>(cfg.k + 1, cfg.k, 1, UpdateMode::kAdd);
  Rng w1_rng(DeriveSeed(cfg.seed, 0x3a1));
  Rng w2_rng(DeriveSeed(cfg.seed, 0x3a2));
  s.dense->Initialize([&](ParamKey key, std::span<double> row) {
    if (key < cfg.k) {
      for (auto& x : row) x = w1_rng.Uniform(-cfg.EffectiveW1Scale(), cfg.EffectiveW1Scale());
    } else if (cfg.w2_init_scale > 0.0) {
      for (auto& x : row) x = w2_rng.Uniform(-cfg.w2_init_scale, cfg.w2_init_scale);
    } else {
      std::fill(row.begin(), row.end(), 0.0);
    }
  });
  return s;
}

SupervisedParams ParamsFromStores(const SupStores& stores, const SupConfig& cfg) {
  SupervisedParams p;
  p.k = cfg.k;
  p.steps = cfg.steps;
  p.lambda = cfg.lambda;
  p.base = EmbeddingTable(stores.base->num_keys(), cfg.k, stores.base->Snapshot());
  auto dense = stores.dense->Snapshot();
  p.w1.assign(dense.begin(), dense.begin() + static_cast<std::ptrdiff_t>(cfg.k * cfg.k));
  p.w2.assign(dense.begin() + static_cast<std::ptrdiff_t>(cfg.k * cfg.k), dense.end());
  return p;
}

SupResult TrainSup(const PartitionedGraph& g, const LabeledSet& labels,
                   SupStores& stores, const SupConfig& cfg) {
  cfg.Validate();
  if (labels.size() == 0) throw DataError("train_sup: no labels");
  const auto train = labels.Select(Split::kTrain);
  std::size_t positives = 0;
  for (const auto& r : train) positives += r.y;
  if (positives == 0 || positives == train.size()) {
    throw DataError("train_sup: training labels contain a single class");
  }
  const std::size_t k = cfg.k;
  const double n_train = static_cast<double>(train.size());

  std::unordered_map<NodeId, int> label_of;
  std::vector<NodeId> train_nodes;
  for (const auto& r : train) {
    if (label_of.emplace(r.node, r.y).second) train_nodes.push_back(r.node);
  }

  // Fixed probe: a deterministic subset of train nodes with a frozen
  // sampled receptive field.
  std::vector<NodeId> probe_nodes = train_nodes;
  {
    Rng rng(DeriveSeed(cfg.seed, 0x9b0be5));
    rng.Shuffle(probe_nodes);
    if (probe_nodes.size() > cfg.probe_nodes) probe_nodes.resize(cfg.probe_nodes);
  }
  Rng probe_rng(DeriveSeed(cfg.seed, 0x9b0be6));
  const auto probe_field = BuildField(g, probe_nodes, cfg.steps, cfg.fanout, &probe_rng);
  auto probe_loss = [&]() {
    const auto p = ParamsFromStores(stores, cfg);
    const auto acts = Forward(probe_field, GatherRows(p.base, probe_field.layers[0]),
                              p.w1, p.w2, k);
    double total = 0.0;
    for (std::size_t i = 0; i < probe_nodes.size(); ++i) {
      total += ClampedBce(acts.preds[probe_field.target_index[i]],
                          label_of[probe_nodes[i]], nullptr);
    }
    return total / static_cast<double>(probe_nodes.size());
  };

  SupResult result;
  result.probe_losses.push_back(probe_loss());
  spdlog::info("train_sup epoch=0 probe_loss={:.6f} train={} workers={}",
               result.probe_losses.back(), train_nodes.size(), cfg.num_workers);

  std::atomic<std::uint64_t> isolated{0};
  std::atomic<std::uint64_t> rejected{0};
  const std::uint64_t base_version = stores.base->version();
  auto epoch_start = std::chrono::steady_clock::now();
  stores.base->set_epoch_callback([&](std::uint64_t version) {
    const std::size_t epoch = version - base_version + 1;
    const double loss = probe_loss();
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - epoch_start).count();
    epoch_start = now;
    result.probe_losses.push_back(loss);
    spdlog::info("train_sup epoch={} probe_loss={:.6f} seconds={:.3f}", epoch, loss,
                 secs);
    if (!std::isfinite(loss)) {
      throw DivergenceError("train_sup diverged at epoch " + std::to_string(epoch));
    }
  });

  auto workers = AssignWorkers(train_nodes, cfg.num_workers, cfg.seed);
  std::vector<ParamKey> dense_keys(k + 1);
  for (std::size_t i = 0; i <= k; ++i) dense_keys[i] = i;

  RunWorkers(workers, *stores.base, [&](WorkerHandle& worker) {
    std::vector<double> dense(dense_keys.size() * k);
    std::vector<double> d_w1(k * k), d_w2(k), d_dense(dense.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      Rng rng = worker.EpochRng(epoch);
      const auto order = worker.ShuffledNodes(epoch);
      for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
        const std::span<const NodeId> batch(order.data() + begin, end - begin);
        const auto field = BuildField(g, batch, cfg.steps, cfg.fanout, &rng);
        isolated.fetch_add(field.isolated, std::memory_order_relaxed);

        const auto& leaves = field.layers[0];
        std::vector<double> rows(leaves.size() * k);
        stores.base->Pull(leaves, rows);
        stores.dense->Pull(dense_keys, dense);
        const std::span<const double> w1(dense.data(), k * k);
        const std::span<const double> w2(dense.data() + k * k, k);

        const auto acts = Forward(field, rows, w1, w2, k);
        std::vector<double> dz(acts.preds.size());
        for (std::size_t i = 0; i < dz.size(); ++i) {
          dz[i] = acts.preds[i] - label_of.at(field.layers[cfg.steps][i]);
        }
        std::vector<double> d_rows(rows.size(), 0.0);
        std::fill(d_w1.begin(), d_w1.end(), 0.0);
        std::fill(d_w2.begin(), d_w2.end(), 0.0);
        Backward(field, acts, dz, w1, w2, k, d_rows, d_w1, d_w2);

        // Touched base rows carry their full penalty; the shared matrices
        // carry the batch's share of theirs.
        double lr = cfg.learning_rate;
        if (cfg.linear_decay) {
          const double progress =
              (static_cast<double>(epoch) +
               static_cast<double>(begin) / static_cast<double>(order.size())) /
              static_cast<double>(cfg.epochs);
          lr *= std::max(1e-4, 1.0 - progress);
        }
        const double dense_lr = lr * cfg.EffectiveDenseScale();
        const double two_lambda = 2.0 * cfg.lambda;
        const double share = static_cast<double>(batch.size()) / n_train;
        // Base rows go back as deltas so concurrent batches sharing a
        // neighborhood both land.
        for (std::size_t i = 0; i < rows.size(); ++i) {
          rows[i] = -lr * (d_rows[i] + two_lambda * rows[i]);
        }
        for (std::size_t i = 0; i < k * k; ++i) {
          d_dense[i] = -dense_lr * (d_w1[i] + two_lambda * share * w1[i]);
        }
        for (std::size_t i = 0; i < k; ++i) {
          d_dense[k * k + i] = -dense_lr * (d_w2[i] + two_lambda * share * w2[i]);
        }
        if (!AllFinite(rows) || !AllFinite(d_dense)) {
          rejected.fetch_add(1);
          spdlog::warn("train_sup worker={} dropped a non-finite batch",
                       worker.worker_id);
          continue;
        }
        stores.base->Push(leaves, rows);
        stores.dense->Push(dense_keys, d_dense);
      }
      stores.base->Barrier(base_version + epoch);
    }
  });
  stores.base->set_epoch_callback(nullptr);

  result.params = ParamsFromStores(stores, cfg);
  for (const auto& r : labels.records) result.nodes.push_back(r.node);
  std::sort(result.nodes.begin(), result.nodes.end());
  result.nodes.erase(std::unique(result.nodes.begin(), result.nodes.end()),
                     result.nodes.end());
  result.scores = PredictNodes(g, result.params, result.nodes);
  result.isolated_fallbacks = isolated.load();
  result.rejected_batches = rejected.load();
  return result;
}

}  // namespace netdp
