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


#ifndef NETDP_GRAPH_STORE_H_
#define NETDP_GRAPH_STORE_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netdp/common.h"

namespace netdp {

// Raised by SampleNeighbors for nodes without out-edges; callers skip them.
class IsolatedNodeError : public Error {
 public:
  using Error::Error;
};

struct RawEdge {
  std::string src;
  std::string dst;
};

struct IngestOptions {
  std::size_t num_shards = 1;
  // Exponent of the degree^alpha negative-sampling distribution.
  double alpha = 0.75;
  // Adjacency lists longer than this keep a uniform random subset.
  std::size_t max_degree = 1000;
  // Fraction of malformed lines tolerated before the run fails.
  double max_skip_rate = 0.01;
  // Also insert (dst, src) for every edge read.
  bool add_reverse_edges = false;
  std::uint64_t seed = 0;
};

struct IngestStats {
  std::uint64_t lines = 0;
  std::uint64_t comments = 0;
  std::uint64_t malformed = 0;
  std::uint64_t edges_read = 0;
  std::uint64_t self_loops = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t truncated_nodes = 0;
};

// One partition of the adjacency-list store: CSR over the targets placed in
// this shard, sorted by node id.
class GraphShard {
 public:
  GraphShard() = default;

  std::size_t size() const { return targets_.size(); }
  std::span<const NodeId> targets() const { return targets_; }
  bool Contains(NodeId v) const;
  // Empty span when v has no list in this shard.
  std::span<const NodeId> Find(NodeId v) const;
  std::span<const NodeId> NeighborsAt(std::size_t index) const;

 private:
  friend class GraphBuilder;
  friend class PartitionedGraph;

  std::vector<NodeId> targets_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<NodeId> neighbors_;
};

// Sharded adjacency lists over densely remapped node ids. Read-only after
// construction and safe for any number of concurrent readers.
class PartitionedGraph {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  PartitionedGraph() = default;
  PartitionedGraph(PartitionedGraph&&) noexcept = default;
  PartitionedGraph& operator=(PartitionedGraph&&) noexcept = default;

  std::size_t num_nodes() const { return raw_ids_.size(); }
  std::size_t num_shards() const { return shards_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  double alpha() const { return alpha_; }
  std::size_t max_degree() const { return max_degree_; }

  const GraphShard& shard(std::size_t i) const { return shards_.at(i); }

  // Full out-neighbor list; empty for sinks. Touches exactly one shard.
  std::span<const NodeId> Neighbors(NodeId v) const;
  std::size_t OutDegree(NodeId v) const { return degrees_.at(v); }
  std::span<const std::uint32_t> degrees() const { return degrees_; }

  // min(s, degree) distinct neighbors chosen uniformly without replacement.
  // Throws IsolatedNodeError when v has no out-neighbors.
  std::vector<NodeId> SampleNeighbors(NodeId v, std::size_t s, Rng& rng) const;

  NodeId SampleNegative(Rng& rng) const;
  std::vector<NodeId> SampleNegatives(std::size_t count, Rng& rng) const;
  // Probability mass of v under the negative-sampling distribution.
  double NegativeProbability(NodeId v) const;
  std::span<const double> negative_cdf() const { return neg_cdf_; }

  const std::string& RawId(NodeId v) const { return raw_ids_.at(v); }
  std::span<const std::string> raw_ids() const { return raw_ids_; }
  // Throws DataError for unknown raw ids.
  NodeId DenseId(const std::string& raw) const;
  bool HasRawId(const std::string& raw) const;

  std::uint64_t shard_reads(std::size_t i) const;
  void ResetShardReads() const;

  // Writes meta, remap and shard_<i> files into `dir` (created if missing).
  void Save(const std::filesystem::path& dir) const;
  static PartitionedGraph Load(const std::filesystem::path& dir);

 private:
  friend class GraphBuilder;

  void Finalize();

  std::vector<GraphShard> shards_;
  std::vector<std::string> raw_ids_;
  std::unordered_map<std::string, NodeId> dense_ids_;
  std::vector<std::uint32_t> degrees_;
  std::vector<double> neg_cdf_;
  std::size_t num_edges_ = 0;
  double alpha_ = 0.75;
  std::size_t max_degree_ = 0;
  std::unique_ptr<std::atomic<std::uint64_t>[]> shard_reads_;
};

// Parses `src<TAB>dst[<TAB>weight]` lines. Comment lines start with '#'.
// Malformed lines are counted in `stats` and skipped.
std::vector<RawEdge> ParseEdgeList(std::istream& in, IngestStats& stats);

PartitionedGraph IngestEdges(std::span<const RawEdge> edges,
                             const IngestOptions& options,
                             IngestStats* stats = nullptr);

// Parses and ingests a file; fails when the malformed-line rate exceeds
// options.max_skip_rate or no usable edge remains.
PartitionedGraph IngestEdgeFile(const std::filesystem::path& path,
                                const IngestOptions& options,
                                IngestStats* stats = nullptr);

}  // namespace netdp

#endif  // NETDP_GRAPH_STORE_H_
