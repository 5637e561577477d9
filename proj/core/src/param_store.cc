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


#include "netdp/param_store.h"

#include <algorithm>
#include <exception>
#include <string>
#include <thread>

namespace netdp {

class ParamStore::RowLock {
 public:
  explicit RowLock(std::atomic_flag& flag) : flag_(flag) {
    while (flag_.test_and_set(std::memory_order_acquire)) {
      std::this_thread::yield();
    }
  }
  ~RowLock() { flag_.clear(std::memory_order_release); }
  RowLock(const RowLock&) = delete;
  RowLock& operator=(const RowLock&) = delete;

 private:
  std::atomic_flag& flag_;
};

ParamStore::ParamStore(std::size_t num_keys, std::size_t dim,
                       std::size_t num_shards, UpdateMode mode)
    : dim_(dim), mode_(mode), shard_of_(num_keys), slot_of_(num_keys) {
  if (dim == 0) throw InvalidArgument("ParamStore: dim must be positive");
  if (num_shards == 0) throw InvalidArgument("ParamStore: num_shards must be positive");
  shards_.resize(num_shards);
  std::vector<std::uint64_t> counts(num_shards, 0);
  for (ParamKey k = 0; k < num_keys; ++k) {
    const auto s = ShardOf(k, num_shards);
    shard_of_[k] = static_cast<std::uint32_t>(s);
    slot_of_[k] = counts[s]++;
  }
  for (std::size_t s = 0; s < num_shards; ++s) {
    shards_[s].values.assign(counts[s] * dim, 0.0);
    // Value-initialized atomic_flag is clear.
    shards_[s].locks = std::make_unique<std::atomic_flag[]>(counts[s]);
  }
}

void ParamStore::CheckKey(ParamKey key) const {
  if (key >= shard_of_.size()) {
    throw InvalidArgument("ParamStore: unknown key " + std::to_string(key));
  }
}

void ParamStore::Initialize(
    const std::function<void(ParamKey, std::span<double>)>& init) {
  for (ParamKey k = 0; k < num_keys(); ++k) {
    auto& shard = shards_[shard_of_[k]];
    RowLock lock(shard.locks[slot_of_[k]]);
    init(k, std::span<double>(shard.values).subspan(slot_of_[k] * dim_, dim_));
  }
}

void ParamStore::InitializeUniform(double scale, std::uint64_t seed) {
  Initialize([&](ParamKey k, std::span<double> row) {
    Rng rng(DeriveSeed(seed, k, 0x1417));
    for (auto& x : row) x = rng.Uniform(-scale, scale);
  });
}

void ParamStore::InitializeZero() {
  Initialize([](ParamKey, std::span<double> row) {
    std::fill(row.begin(), row.end(), 0.0);
  });
}

void ParamStore::Pull(std::span<const ParamKey> keys,
                      std::span<double> out) const {
  if (out.size() != keys.size() * dim_) {
    throw InvalidArgument("ParamStore::Pull: output size mismatch");
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const ParamKey k = keys[i];
    CheckKey(k);
    const auto& shard = shards_[shard_of_[k]];
    const double* src = shard.values.data() + slot_of_[k] * dim_;
    RowLock lock(shard.locks[slot_of_[k]]);
    std::copy(src, src + dim_, out.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  }
}

std::vector<double> ParamStore::Pull(ParamKey key) const {
  std::vector<double> out(dim_);
  Pull(std::span<const ParamKey>(&key, 1), out);
  return out;
}

void ParamStore::Push(std::span<const ParamKey> keys,
                      std::span<const double> values) {
  if (values.size() != keys.size() * dim_) {
    throw InvalidArgument("ParamStore::Push: value size mismatch");
  }
  for (ParamKey k : keys) CheckKey(k);
  if (!AllFinite(values)) {
    throw NonFiniteError("ParamStore::Push: non-finite value rejected");
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const ParamKey k = keys[i];
    auto& shard = shards_[shard_of_[k]];
    double* dst = shard.values.data() + slot_of_[k] * dim_;
    const double* src = values.data() + i * dim_;
    RowLock lock(shard.locks[slot_of_[k]]);
    if (mode_ == UpdateMode::kOverwrite) {
      std::copy(src, src + dim_, dst);
    } else {
      for (std::size_t j = 0; j < dim_; ++j) dst[j] += src[j];
    }
  }
}

void ParamStore::Push(ParamKey key, std::span<const double> value) {
  Push(std::span<const ParamKey>(&key, 1), value);
}

std::vector<double> ParamStore::Snapshot() const {
  std::vector<double> out(num_keys() * dim_);
  for (ParamKey k = 0; k < num_keys(); ++k) {
    const auto& shard = shards_[shard_of_[k]];
    const double* src = shard.values.data() + slot_of_[k] * dim_;
    RowLock lock(shard.locks[slot_of_[k]]);
    std::copy(src, src + dim_, out.begin() + static_cast<std::ptrdiff_t>(k * dim_));
  }
  return out;
}

void ParamStore::set_num_workers(std::size_t n) {
  if (n == 0) throw InvalidArgument("ParamStore: need at least one worker");
  std::lock_guard lock(barrier_mu_);
  num_workers_ = n;
  arrived_ = 0;
  aborted_ = false;
}

void ParamStore::Barrier(std::uint64_t epoch) {
  std::unique_lock lock(barrier_mu_);
  if (aborted_) throw BarrierAborted("barrier aborted by a failed worker");
  if (epoch != version_.load()) {
    throw InvalidArgument("Barrier: epoch " + std::to_string(epoch) +
                          " does not match store version " +
                          std::to_string(version_.load()));
  }
  const auto generation = generation_;
  if (++arrived_ == num_workers_) {
    try {
      if (epoch_callback_) epoch_callback_(epoch);
    } catch (...) {
      aborted_ = true;
      barrier_cv_.notify_all();
      throw;
    }
    arrived_ = 0;
    ++generation_;
    version_.fetch_add(1);
    barrier_cv_.notify_all();
    return;
  }
  const bool released = barrier_cv_.wait_for(lock, barrier_timeout_, [&] {
    return generation_ != generation || aborted_;
  });
  if (!released) {
    aborted_ = true;
    barrier_cv_.notify_all();
    throw TimeoutError("Barrier: epoch " + std::to_string(epoch) +
                       " timed out waiting for workers (" +
                       std::to_string(arrived_) + "/" +
                       std::to_string(num_workers_) + " arrived)");
  }
  if (generation_ == generation) {
    throw BarrierAborted("barrier aborted by a failed worker");
  }
}

void ParamStore::Abort() {
  std::lock_guard lock(barrier_mu_);
  aborted_ = true;
  barrier_cv_.notify_all();
}

bool ParamStore::aborted() const {
  std::lock_guard lock(barrier_mu_);
  return aborted_;
}

std::vector<NodeId> WorkerHandle::ShuffledNodes(std::uint64_t epoch) const {
  std::vector<NodeId> order = nodes;
  Rng rng(DeriveSeed(seed, worker_id, epoch, 0x5f));
  rng.Shuffle(order);
  return order;
}

std::vector<WorkerHandle> AssignWorkers(std::span<const NodeId> nodes,
                                        std::size_t num_workers,
                                        std::uint64_t seed) {
  if (num_workers == 0) throw InvalidArgument("need at least one worker");
  std::vector<WorkerHandle> workers(num_workers);
  for (std::size_t w = 0; w < num_workers; ++w) {
    workers[w].worker_id = w;
    workers[w].seed = seed;
  }
  for (NodeId v : nodes) {
    workers[Mix64(v ^ 0xa5a5a5a5a5a5a5a5ULL) % num_workers].nodes.push_back(v);
  }
  return workers;
}

std::vector<WorkerHandle> AssignWorkers(std::size_t num_nodes,
                                        std::size_t num_workers,
                                        std::uint64_t seed) {
  std::vector<NodeId> all(num_nodes);
  for (NodeId v = 0; v < num_nodes; ++v) all[v] = v;
  return AssignWorkers(all, num_workers, seed);
}

void RunWorkers(std::span<WorkerHandle> workers, ParamStore& sync,
                const std::function<void(WorkerHandle&)>& body) {
  sync.set_num_workers(workers.size());
  if (workers.size() == 1) {
    body(workers[0]);
    return;
  }
  std::mutex mu;
  std::exception_ptr root_cause;
  std::exception_ptr secondary;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers.size());
    for (auto& w : workers) {
      threads.emplace_back([&, wp = &w] {
        try {
          body(*wp);
        } catch (const BarrierAborted&) {
          std::lock_guard lock(mu);
          if (!secondary) secondary = std::current_exception();
        } catch (...) {
          {
            std::lock_guard lock(mu);
            if (!root_cause) root_cause = std::current_exception();
          }
          sync.Abort();
        }
      });
    }
  }
  if (root_cause) std::rethrow_exception(root_cause);
  if (secondary) std::rethrow_exception(secondary);
}

}  // namespace netdp
