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


#ifndef NETDP_PARAM_STORE_H_
#define NETDP_PARAM_STORE_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "netdp/common.h"

namespace netdp {

using ParamKey = std::uint64_t;

enum class UpdateMode {
  // Push stores the given vector (last writer wins per key).
  kOverwrite,
  // Push adds the given delta to the stored vector.
  kAdd,
};

// Raised in workers released from a barrier because another worker failed.
class BarrierAborted : public Error {
 public:
  using Error::Error;
};

// In-process sharded parameter table with pull/push/barrier semantics.
//
// Keys are dense in [0, num_keys) and are placed on shard
// ShardOf(key, num_shards), the same placement the graph store uses for
// adjacency lists. Every key carries its own spin lock, so a pull never
// observes a partially written vector; there is no ordering across keys.
class ParamStore {
 public:
  ParamStore(std::size_t num_keys, std::size_t dim, std::size_t num_shards,
             UpdateMode mode);

  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  std::size_t num_keys() const { return shard_of_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_shards() const { return shards_.size(); }
  UpdateMode mode() const { return mode_; }
  std::size_t ShardOfKey(ParamKey key) const { return shard_of_.at(key); }

  // Fills every row; `init` receives the key and the row to write.
  void Initialize(const std::function<void(ParamKey, std::span<double>)>& init);
  // Row `key` is drawn uniformly from [-scale, scale] with an Rng seeded by
  // (seed, key), so the table does not depend on the shard count.
  void InitializeUniform(double scale, std::uint64_t seed);
  void InitializeZero();

  // Point-in-time copy of each row, written to out[i * dim, (i + 1) * dim).
  void Pull(std::span<const ParamKey> keys, std::span<double> out) const;
  std::vector<double> Pull(ParamKey key) const;

  // Applies values[i * dim, (i + 1) * dim) to keys[i]. The whole push is
  // rejected with NonFiniteError before anything is written if any value is
  // NaN or infinite.
  void Push(std::span<const ParamKey> keys, std::span<const double> values);
  void Push(ParamKey key, std::span<const double> value);

  // Row-major copy of the whole table in key order.
  std::vector<double> Snapshot() const;

  // Barrier rendezvous for `num_workers` participants.
  void set_num_workers(std::size_t n);
  std::size_t num_workers() const { return num_workers_; }
  void set_barrier_timeout(std::chrono::milliseconds timeout) {
    barrier_timeout_ = timeout;
  }
  // Runs in the last worker to arrive, before anyone is released, with the
  // epoch being closed. Exceptions abort the barrier.
  void set_epoch_callback(std::function<void(std::uint64_t)> callback) {
    epoch_callback_ = std::move(callback);
  }

  // Blocks until every worker has called Barrier(epoch), then increments
  // version. `epoch` must equal the current version. Throws TimeoutError
  // when the rendezvous does not complete within the configured deadline.
  void Barrier(std::uint64_t epoch);
  // Releases every waiter with BarrierAborted.
  void Abort();
  bool aborted() const;

  std::uint64_t version() const { return version_.load(); }

 private:
  struct Shard {
    std::vector<double> values;
    std::unique_ptr<std::atomic_flag[]> locks;
  };

  class RowLock;

  void CheckKey(ParamKey key) const;

  std::size_t dim_;
  UpdateMode mode_;
  std::vector<Shard> shards_;
  std::vector<std::uint32_t> shard_of_;
  std::vector<std::uint64_t> slot_of_;

  std::atomic<std::uint64_t> version_{0};

  mutable std::mutex barrier_mu_;
  std::condition_variable barrier_cv_;
  std::size_t num_workers_ = 1;
  std::size_t arrived_ = 0;
  std::uint64_t generation_ = 0;
  bool aborted_ = false;
  std::chrono::milliseconds barrier_timeout_{std::chrono::minutes(10)};
  std::function<void(std::uint64_t)> epoch_callback_;
};

// Worker-side view: the nodes this worker owns and its per-epoch random
// stream.
struct WorkerHandle {
  std::size_t worker_id = 0;
  std::vector<NodeId> nodes;
  std::uint64_t seed = 0;

  Rng EpochRng(std::uint64_t epoch) const {
    return Rng(DeriveSeed(seed, worker_id, epoch));
  }
  // `nodes` in a fresh order that depends only on (seed, worker, epoch).
  std::vector<NodeId> ShuffledNodes(std::uint64_t epoch) const;
};

// Hashes nodes [0, num_nodes) onto workers; every node lands on exactly one.
std::vector<WorkerHandle> AssignWorkers(std::size_t num_nodes,
                                        std::size_t num_workers,
                                        std::uint64_t seed);
// Same, restricted to `nodes`.
std::vector<WorkerHandle> AssignWorkers(std::span<const NodeId> nodes,
                                        std::size_t num_workers,
                                        std::uint64_t seed);

// Runs body(worker) on one thread per worker (inline when there is only
// one). A failing worker aborts `sync` so peers blocked in Barrier are
// released; the first root-cause exception is rethrown after all joins.
void RunWorkers(std::span<WorkerHandle> workers, ParamStore& sync,
                const std::function<void(WorkerHandle&)>& body);

}  // namespace netdp

#endif  // NETDP_PARAM_STORE_H_
