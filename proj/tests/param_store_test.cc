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

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <algorithm>
#include <set>
#include <thread>

#include <gtest/gtest.h>

namespace netdp {
namespace {

using namespace std::chrono_literals;

TEST(ParamStoreTest, PullAfterInitReturnsInitialization) {
  ParamStore store(10, 3, 2, UpdateMode::kOverwrite);
  store.Initialize([](ParamKey k, std::span<double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = 10.0 * k + i;
  });
  EXPECT_EQ(store.Pull(4), (std::vector<double>{40, 41, 42}));
  std::vector<ParamKey> keys{9, 0};
  std::vector<double> out(6);
  store.Pull(keys, out);
  EXPECT_EQ(out, (std::vector<double>{90, 91, 92, 0, 1, 2}));
}

TEST(ParamStoreTest, UniformInitDoesNotDependOnShardCount) {
  ParamStore a(50, 4, 1, UpdateMode::kOverwrite), b(50, 4, 7, UpdateMode::kOverwrite);
  a.InitializeUniform(0.25, 3);
  b.InitializeUniform(0.25, 3);
  EXPECT_EQ(a.Snapshot(), b.Snapshot());
  for (double x : a.Snapshot()) {
    EXPECT_LE(std::abs(x), 0.25);
  }
}

TEST(ParamStoreTest, OverwriteKeepsLastPush) {
  ParamStore store(3, 2, 2, UpdateMode::kOverwrite);
  store.InitializeZero();
  store.Push(1, std::vector<double>{1, 2});
  EXPECT_EQ(store.Pull(1), (std::vector<double>{1, 2}));
  store.Push(1, std::vector<double>{3, 4});
  EXPECT_EQ(store.Pull(1), (std::vector<double>{3, 4}));
  EXPECT_EQ(store.Pull(0), (std::vector<double>{0, 0}));
}

TEST(ParamStoreTest, AddAccumulates) {
  ParamStore store(2, 2, 1, UpdateMode::kAdd);
  store.Initialize([](ParamKey, std::span<double> row) { row[0] = 1.0, row[1] = -1.0; });
  const std::vector<double> delta{0.5, 2.0};
  store.Push(0, delta);
  store.Push(0, delta);
  EXPECT_EQ(store.Pull(0), (std::vector<double>{2.0, 3.0}));
}

TEST(ParamStoreTest, RejectsUnknownKeysAndBadShapes) {
  ParamStore store(4, 2, 2, UpdateMode::kOverwrite);
  EXPECT_THROW(store.Pull(4), InvalidArgument);
  EXPECT_THROW(store.Push(7, std::vector<double>{1, 2}), InvalidArgument);
  EXPECT_THROW(store.Push(1, std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST(ParamStoreTest, NonFinitePushWritesNothing) {
  ParamStore store(3, 2, 2, UpdateMode::kOverwrite);
  store.InitializeZero();
  std::vector<ParamKey> keys{0, 1};
  std::vector<double> values{1, 2, 3, std::nan("")};
  EXPECT_THROW(store.Push(keys, values), NonFiniteError);
  EXPECT_EQ(store.Pull(0), (std::vector<double>{0, 0}));
  EXPECT_EQ(store.Pull(1), (std::vector<double>{0, 0}));
}

TEST(ParamStoreTest, KeysPlacedLikeGraphShards) {
  ParamStore store(100, 1, 5, UpdateMode::kOverwrite);
  for (ParamKey k = 0; k < 100; ++k) EXPECT_EQ(store.ShardOfKey(k), ShardOf(k, 5));
}

// Sentinel rows: writer w pushes rows whose every entry equals a value
// unique to (w, iteration). A torn read would mix two values.
TEST(ParamStoreConcurrencyTest, PerKeyWritesAreAtomic) {
  constexpr std::size_t kDim = 257, kKeys = 4, kWriters = 8, kIters = 3000;
  ParamStore store(kKeys, kDim, 2, UpdateMode::kOverwrite);
  store.InitializeZero();
  std::atomic<bool> done{false};
  std::atomic<std::uint64_t> torn{0}, reads{0};
  std::vector<std::jthread> threads;
  for (std::size_t w = 0; w < kWriters; ++w) {
    threads.emplace_back([&, w] {
      std::vector<double> row(kDim);
      for (std::size_t it = 0; it < kIters; ++it) {
        std::fill(row.begin(), row.end(), static_cast<double>(w * kIters + it + 1));
        store.Push(it % kKeys, row);
      }
    });
  }
  std::vector<std::jthread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&] {
      std::vector<ParamKey> keys{0, 1, 2, 3};
      std::vector<double> out(kKeys * kDim);
      while (!done) {
        store.Pull(keys, out);
        for (std::size_t k = 0; k < kKeys; ++k) {
          for (std::size_t i = 1; i < kDim; ++i) {
            if (out[k * kDim + i] != out[k * kDim]) {
              ++torn;
              break;
            }
          }
        }
        ++reads;
      }
    });
  }
  threads.clear();
  done = true;
  readers.clear();
  EXPECT_EQ(torn.load(), 0u);
  EXPECT_GT(reads.load(), 0u);
}

TEST(ParamStoreConcurrencyTest, AddModeConservesEveryIncrement) {
  ParamStore store(1, 1, 1, UpdateMode::kAdd);
  store.Initialize([](ParamKey, std::span<double> row) { row[0] = 5.0; });
  std::vector<std::jthread> threads;
  for (int w = 0; w < 8; ++w) {
    threads.emplace_back([&] {
      const std::vector<double> one{1.0};
      for (int i = 0; i < 1000; ++i) store.Push(0, one);
    });
  }
  threads.clear();
  EXPECT_EQ(store.Pull(0)[0], 8005.0);
}

TEST(ParamStoreConcurrencyTest, DistinctKeysEndAtLastPushPerKey) {
  constexpr std::size_t kWorkers = 4, kPerWorker = 64, kDim = 3;
  ParamStore store(kWorkers * kPerWorker, kDim, 3, UpdateMode::kOverwrite);
  store.InitializeZero();
  // Replay log: each worker records its own pushes; keys are disjoint so
  // the log's last entry per key is the oracle.
  std::vector<std::vector<std::pair<ParamKey, std::vector<double>>>> logs(kWorkers);
  std::vector<std::jthread> threads;
  for (std::size_t w = 0; w < kWorkers; ++w) {
    threads.emplace_back([&, w] {
      Rng rng(w);
      for (int it = 0; it < 2000; ++it) {
        const ParamKey key = w * kPerWorker + rng.UniformInt(kPerWorker);
        std::vector<double> v(kDim);
        for (auto& x : v) x = rng.Uniform();
        store.Push(key, v);
        logs[w].emplace_back(key, v);
      }
    });
  }
  threads.clear();
  std::vector<std::vector<double>> expect(kWorkers * kPerWorker, std::vector<double>(kDim, 0.0));
  for (const auto& log : logs) {
    for (const auto& [k, v] : log) expect[k] = v;
  }
  const auto snap = store.Snapshot();
  for (ParamKey k = 0; k < expect.size(); ++k) {
    for (std::size_t i = 0; i < kDim; ++i) ASSERT_EQ(snap[k * kDim + i], expect[k][i]);
  }
}

TEST(BarrierTest, SingleWorkerReturnsImmediately) {
  ParamStore store(1, 1, 1, UpdateMode::kOverwrite);
  store.set_num_workers(1);
  EXPECT_EQ(store.version(), 0u);
  store.Barrier(0);
  EXPECT_EQ(store.version(), 1u);
  EXPECT_THROW(store.Barrier(0), InvalidArgument);
}

TEST(BarrierTest, ReleasesOnlyAfterLastArrival) {
  ParamStore store(1, 1, 1, UpdateMode::kOverwrite);
  std::vector<WorkerHandle> workers(4);
  for (std::size_t i = 0; i < 4; ++i) workers[i].worker_id = i;
  std::atomic<int> arrived{0};
  std::mutex mu;
  std::vector<int> seen_at_release;
  int callbacks = 0;
  store.set_epoch_callback([&](std::uint64_t) { ++callbacks; });
  RunWorkers(workers, store, [&](WorkerHandle& w) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20 * w.worker_id));
    ++arrived;
    store.Barrier(0);
    std::lock_guard lock(mu);
    seen_at_release.push_back(arrived.load());
  });
  EXPECT_EQ(seen_at_release, (std::vector<int>{4, 4, 4, 4}));
  EXPECT_EQ(callbacks, 1);
  EXPECT_EQ(store.version(), 1u);
}

TEST(BarrierTest, EpochIsolation) {
  // Each worker writes its own key in epoch e; after the barrier every
  // worker must read every epoch-e value, and the callback sees them too.
  constexpr std::size_t kWorkers = 4, kEpochs = 25;
  ParamStore store(kWorkers, 1, 2, UpdateMode::kOverwrite);
  store.InitializeZero();
  std::vector<WorkerHandle> workers(kWorkers);
  for (std::size_t i = 0; i < kWorkers; ++i) workers[i].worker_id = i;
  std::atomic<int> violations{0};
  std::vector<std::vector<double>> snapshots;
  store.set_epoch_callback([&](std::uint64_t) { snapshots.push_back(store.Snapshot()); });
  RunWorkers(workers, store, [&](WorkerHandle& w) {
    for (std::uint64_t e = 0; e < kEpochs; ++e) {
      if (w.worker_id % 2) std::this_thread::sleep_for(1ms);
      store.Push(w.worker_id, std::vector<double>{static_cast<double>(e + 1)});
      store.Barrier(2 * e);
      for (ParamKey k = 0; k < kWorkers; ++k) {
        if (store.Pull(k)[0] != static_cast<double>(e + 1)) ++violations;
      }
      // Nobody may start epoch e+1 writes until all reads above are done.
      store.Barrier(2 * e + 1);
    }
  });
  EXPECT_EQ(violations.load(), 0);
  ASSERT_EQ(snapshots.size(), 2 * kEpochs);
  for (std::size_t e = 0; e < kEpochs; ++e) {
    EXPECT_EQ(snapshots[2 * e], std::vector<double>(kWorkers, e + 1.0));
  }
}

TEST(BarrierTest, SnapshotIdenticalWhicheverWorkerComputes) {
  ParamStore store(16, 2, 2, UpdateMode::kOverwrite);
  store.InitializeUniform(1.0, 9);
  std::vector<WorkerHandle> workers(3);
  for (std::size_t i = 0; i < 3; ++i) workers[i].worker_id = i;
  std::mutex mu;
  std::vector<std::vector<double>> seen;
  RunWorkers(workers, store, [&](WorkerHandle& w) {
    store.Push(w.worker_id, std::vector<double>{1.0 * w.worker_id, 2.0});
    store.Barrier(0);
    auto snap = store.Snapshot();
    std::lock_guard lock(mu);
    seen.push_back(std::move(snap));
  });
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0], seen[1]);
  EXPECT_EQ(seen[1], seen[2]);
}

TEST(BarrierTest, MissingWorkerTimesOut) {
  ParamStore store(1, 1, 1, UpdateMode::kOverwrite);
  store.set_num_workers(2);
  store.set_barrier_timeout(50ms);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(store.Barrier(0), TimeoutError);
  EXPECT_GE(std::chrono::steady_clock::now() - start, 50ms);
  EXPECT_TRUE(store.aborted());
}

TEST(BarrierTest, FailingWorkerReleasesPeersAndSurfacesRootCause) {
  ParamStore store(1, 1, 1, UpdateMode::kOverwrite);
  std::vector<WorkerHandle> workers(4);
  for (std::size_t i = 0; i < 4; ++i) workers[i].worker_id = i;
  std::atomic<int> aborted_peers{0};
  try {
    RunWorkers(workers, store, [&](WorkerHandle& w) {
      if (w.worker_id == 2) throw DataError("boom");
      try {
        store.Barrier(0);
      } catch (const BarrierAborted&) {
        ++aborted_peers;
        throw;
      }
    });
    FAIL() << "expected an exception";
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "boom");
  }
  EXPECT_EQ(aborted_peers.load(), 3);
}

TEST(WorkerTest, AssignmentPartitionsNodes) {
  const auto workers = AssignWorkers(1000, 4, 1);
  std::set<NodeId> all;
  std::size_t total = 0;
  for (const auto& w : workers) {
    total += w.nodes.size();
    all.insert(w.nodes.begin(), w.nodes.end());
    EXPECT_GT(w.nodes.size(), 150u);
  }
  EXPECT_EQ(total, 1000u);
  EXPECT_EQ(all.size(), 1000u);
}

TEST(WorkerTest, ShuffleIsDeterministicPerEpoch) {
  const auto workers = AssignWorkers(200, 2, 8);
  const auto a = workers[1].ShuffledNodes(3);
  EXPECT_EQ(a, workers[1].ShuffledNodes(3));
  EXPECT_NE(a, workers[1].ShuffledNodes(4));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, workers[1].nodes);
}

}  // namespace
}  // namespace netdp
