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


#include "netdp/graph_store.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "netdp/binary_io.h"

namespace netdp {

bool GraphShard::Contains(NodeId v) const {
  return std::binary_search(targets_.begin(), targets_.end(), v);
}

std::span<const NodeId> GraphShard::Find(NodeId v) const {
  auto it = std::lower_bound(targets_.begin(), targets_.end(), v);
  if (it == targets_.end() || *it != v) return {};
  return NeighborsAt(static_cast<std::size_t>(it - targets_.begin()));
}

std::span<const NodeId> GraphShard::NeighborsAt(std::size_t index) const {
  const auto begin = offsets_[index];
  const auto end = offsets_[index + 1];
  return std::span<const NodeId>(neighbors_).subspan(begin, end - begin);
}

// Assembles a PartitionedGraph from per-node adjacency lists.
class GraphBuilder {
 public:
  static PartitionedGraph Build(std::vector<std::string> raw_ids,
                                const std::vector<std::vector<NodeId>>& adj,
                                std::size_t num_shards, double alpha,
                                std::size_t max_degree) {
    if (num_shards == 0) throw InvalidArgument("num_shards must be >= 1");
    PartitionedGraph g;
    g.raw_ids_ = std::move(raw_ids);
    g.alpha_ = alpha;
    g.max_degree_ = max_degree;
    g.shards_.resize(num_shards);
    // Node ids are visited in ascending order, so each shard's target list
    // comes out sorted.
    for (NodeId v = 0; v < adj.size(); ++v) {
      if (adj[v].empty()) continue;
      GraphShard& shard = g.shards_[ShardOf(v, num_shards)];
      shard.targets_.push_back(v);
      shard.neighbors_.insert(shard.neighbors_.end(), adj[v].begin(),
                              adj[v].end());
      shard.offsets_.push_back(shard.neighbors_.size());
    }
    g.Finalize();
    return g;
  }
};

void PartitionedGraph::Finalize() {
  const std::size_t n = raw_ids_.size();
  dense_ids_.clear();
  dense_ids_.reserve(n);
  for (NodeId v = 0; v < n; ++v) dense_ids_.emplace(raw_ids_[v], v);

  degrees_.assign(n, 0);
  num_edges_ = 0;
  for (const auto& shard : shards_) {
    for (std::size_t i = 0; i < shard.size(); ++i) {
      const auto deg = shard.offsets_[i + 1] - shard.offsets_[i];
      degrees_[shard.targets_[i]] = static_cast<std::uint32_t>(deg);
      num_edges_ += deg;
    }
  }

  // Cumulative degree^alpha distribution. pow(0, 0) == 1, so alpha == 0
  // is uniform over every node including sinks.
  neg_cdf_.assign(n, 0.0);
  double total = 0.0;
  std::size_t last_positive = 0;
  for (NodeId v = 0; v < n; ++v) {
    const double w = std::pow(static_cast<double>(degrees_[v]), alpha_);
    if (w > 0.0) last_positive = v;
    total += w;
    neg_cdf_[v] = total;
  }
  if (n > 0) {
    if (!(total > 0.0)) throw DataError("negative-sampling table has no mass");
    for (auto& c : neg_cdf_) c /= total;
    // Pin the tail to exactly 1 so a draw in [0, 1) always lands.
    for (std::size_t v = last_positive; v < n; ++v) neg_cdf_[v] = 1.0;
  }

  shard_reads_ = std::make_unique<std::atomic<std::uint64_t>[]>(shards_.size());
  for (std::size_t i = 0; i < shards_.size(); ++i) shard_reads_[i] = 0;
}

std::span<const NodeId> PartitionedGraph::Neighbors(NodeId v) const {
  if (v >= num_nodes()) {
    throw InvalidArgument("node " + std::to_string(v) + " not in graph");
  }
  const auto s = ShardOf(v, shards_.size());
  shard_reads_[s].fetch_add(1, std::memory_order_relaxed);
  return shards_[s].Find(v);
}

std::vector<NodeId> PartitionedGraph::SampleNeighbors(NodeId v, std::size_t s,
                                                      Rng& rng) const {
  const auto nbrs = Neighbors(v);
  if (nbrs.empty()) {
    throw IsolatedNodeError("node " + std::to_string(v) + " has no neighbors");
  }
  std::vector<NodeId> pool(nbrs.begin(), nbrs.end());
  if (s >= pool.size()) return pool;
  // Partial Fisher-Yates: the first s slots become a uniform sample.
  for (std::size_t i = 0; i < s; ++i) {
    const auto j = i + rng.UniformInt(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(s);
  return pool;
}

NodeId PartitionedGraph::SampleNegative(Rng& rng) const {
  if (neg_cdf_.empty()) throw DataError("negative-sampling table not built");
  const double u = rng.Uniform();
  auto it = std::upper_bound(neg_cdf_.begin(), neg_cdf_.end(), u);
  if (it == neg_cdf_.end()) --it;
  return static_cast<NodeId>(it - neg_cdf_.begin());
}

std::vector<NodeId> PartitionedGraph::SampleNegatives(std::size_t count,
                                                      Rng& rng) const {
  std::vector<NodeId> out(count);
  for (auto& v : out) v = SampleNegative(rng);
  return out;
}

double PartitionedGraph::NegativeProbability(NodeId v) const {
  const double prev = v == 0 ? 0.0 : neg_cdf_.at(v - 1);
  return neg_cdf_.at(v) - prev;
}

NodeId PartitionedGraph::DenseId(const std::string& raw) const {
  auto it = dense_ids_.find(raw);
  if (it == dense_ids_.end()) throw DataError("unknown node id '" + raw + "'");
  return it->second;
}

bool PartitionedGraph::HasRawId(const std::string& raw) const {
  return dense_ids_.contains(raw);
}

std::uint64_t PartitionedGraph::shard_reads(std::size_t i) const {
  return shard_reads_[i].load(std::memory_order_relaxed);
}

void PartitionedGraph::ResetShardReads() const {
  for (std::size_t i = 0; i < shards_.size(); ++i) shard_reads_[i] = 0;
}

void PartitionedGraph::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    BinaryWriter w(dir / "meta");
    w.WriteBytes("NDPM");
    w.WriteU32(kFormatVersion);
    w.WriteU64(num_nodes());
    w.WriteU64(num_shards());
    w.WriteF64(alpha_);
    w.WriteU64(max_degree_);
    w.WriteU64(num_edges_);
    w.Close();
  }
  {
    BinaryWriter w(dir / "remap");
    w.WriteBytes("NDPR");
    w.WriteU32(kFormatVersion);
    w.WriteU64(raw_ids_.size());
    for (const auto& id : raw_ids_) w.WriteString(id);
    w.Close();
  }
  for (std::size_t i = 0; i < shards_.size(); ++i) {
    const auto& shard = shards_[i];
    BinaryWriter w(dir / ("shard_" + std::to_string(i)));
    w.WriteBytes("NDPS");
    w.WriteU32(kFormatVersion);
    w.WriteU64(shard.size());
    for (std::size_t t = 0; t < shard.size(); ++t) {
      w.WriteU64(shard.targets_[t]);
      const auto nbrs = shard.NeighborsAt(t);
      w.WriteU64Array(nbrs);
    }
    w.Close();
  }
}

PartitionedGraph PartitionedGraph::Load(const std::filesystem::path& dir) {
  PartitionedGraph g;
  std::uint64_t n, num_shards, num_edges;
  {
    BinaryReader r(dir / "meta");
    r.ExpectHeader("NDPM", kFormatVersion);
    n = r.ReadU64();
    num_shards = r.ReadU64();
    g.alpha_ = r.ReadF64();
    g.max_degree_ = r.ReadU64();
    num_edges = r.ReadU64();
  }
  if (num_shards == 0) throw DataError("meta: zero shards");
  {
    BinaryReader r(dir / "remap");
    r.ExpectHeader("NDPR", kFormatVersion);
    if (r.ReadU64() != n) throw DataError("remap size does not match meta");
    g.raw_ids_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) g.raw_ids_.push_back(r.ReadString());
  }
  g.shards_.resize(num_shards);
  for (std::size_t i = 0; i < num_shards; ++i) {
    BinaryReader r(dir / ("shard_" + std::to_string(i)));
    r.ExpectHeader("NDPS", kFormatVersion);
    auto& shard = g.shards_[i];
    const auto count = r.ReadU64();
    for (std::uint64_t t = 0; t < count; ++t) {
      const NodeId v = r.ReadU64();
      if (v >= n || ShardOf(v, num_shards) != i ||
          (!shard.targets_.empty() && shard.targets_.back() >= v)) {
        throw DataError("shard_" + std::to_string(i) + ": misplaced node");
      }
      auto nbrs = r.ReadU64Array();
      for (auto u : nbrs) {
        if (u >= n) throw DataError("shard_" + std::to_string(i) + ": bad id");
      }
      shard.targets_.push_back(v);
      shard.neighbors_.insert(shard.neighbors_.end(), nbrs.begin(), nbrs.end());
      shard.offsets_.push_back(shard.neighbors_.size());
    }
  }
  g.Finalize();
  if (g.num_edges_ != num_edges) throw DataError("edge count mismatch");
  return g;
}

std::vector<RawEdge> ParseEdgeList(std::istream& in, IngestStats& stats) {
  std::vector<RawEdge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++stats.lines;
    if (line.empty() || line.front() == '#') {
      ++stats.comments;
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    bool ok = (fields.size() == 2 || fields.size() == 3) &&
              !fields[0].empty() && !fields[1].empty();
    if (ok && fields.size() == 3) {
      // The weight column is accepted but unused; it must still parse.
      double weight;
      const auto f = fields[2];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), weight);
      ok = ec == std::errc() && ptr == f.data() + f.size();
    }
    if (!ok) {
      ++stats.malformed;
      continue;
    }
    edges.push_back({std::string(fields[0]), std::string(fields[1])});
    ++stats.edges_read;
  }
  return edges;
}

PartitionedGraph IngestEdges(std::span<const RawEdge> edges,
                             const IngestOptions& options,
                             IngestStats* stats) {
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  if (options.num_shards == 0) throw InvalidArgument("num_shards must be >= 1");
  if (!(options.alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  if (options.max_degree == 0) throw InvalidArgument("max_degree must be >= 1");
  if (edges.empty()) throw DataError("empty edge input");

  // Dense ids in order of first appearance.
  std::vector<std::string> raw_ids;
  std::unordered_map<std::string, NodeId> index;
  auto intern = [&](const std::string& raw) {
    auto [it, inserted] = index.try_emplace(raw, raw_ids.size());
    if (inserted) raw_ids.push_back(raw);
    return it->second;
  };
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edges.size() * (options.add_reverse_edges ? 2 : 1));
  for (const auto& e : edges) {
    const NodeId s = intern(e.src);
    const NodeId d = intern(e.dst);
    if (s == d) {
      ++st.self_loops;
      continue;
    }
    pairs.emplace_back(s, d);
    if (options.add_reverse_edges) pairs.emplace_back(d, s);
  }
  const std::size_t n = raw_ids.size();

  // Grouping pass: counting sort by source keeps input order per list.
  std::vector<std::uint64_t> offsets(n + 1, 0);
  for (const auto& [s, d] : pairs) ++offsets[s + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<NodeId> grouped(pairs.size());
  {
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [s, d] : pairs) grouped[cursor[s]++] = d;
  }
  pairs.clear();
  pairs.shrink_to_fit();

  std::vector<std::vector<NodeId>> adj(n);
  std::vector<NodeId> seen(n, 0);  // seen[d] == s + 1 while building s
  for (NodeId s = 0; s < n; ++s) {
    auto& list = adj[s];
    for (auto i = offsets[s]; i < offsets[s + 1]; ++i) {
      const NodeId d = grouped[i];
      if (seen[d] == s + 1) {
        ++st.duplicates;
        continue;
      }
      seen[d] = s + 1;
      list.push_back(d);
    }
    if (list.size() > options.max_degree) {
      ++st.truncated_nodes;
      Rng rng(DeriveSeed(options.seed, s, 0xde9));
      std::vector<std::size_t> keep(list.size());
      std::iota(keep.begin(), keep.end(), 0);
      for (std::size_t i = 0; i < options.max_degree; ++i) {
        std::swap(keep[i], keep[i + rng.UniformInt(keep.size() - i)]);
      }
      keep.resize(options.max_degree);
      std::sort(keep.begin(), keep.end());
      std::vector<NodeId> kept;
      kept.reserve(keep.size());
      for (auto k : keep) kept.push_back(list[k]);
      list = std::move(kept);
    }
  }
  std::size_t total = 0;
  for (const auto& l : adj) total += l.size();
  if (total == 0) throw DataError("no edges left after cleanup");

  return GraphBuilder::Build(std::move(raw_ids), adj, options.num_shards,
                             options.alpha, options.max_degree);
}

PartitionedGraph IngestEdgeFile(const std::filesystem::path& path,
                                const IngestOptions& options,
                                IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path.string());
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  const auto edges = ParseEdgeList(in, st);
  const auto data_lines = st.lines - st.comments;
  if (data_lines == 0) throw DataError("empty edge input: " + path.string());
  const double skip_rate =
      static_cast<double>(st.malformed) / static_cast<double>(data_lines);
  if (skip_rate > options.max_skip_rate) {
    std::ostringstream msg;
    msg << "too many malformed lines in " << path.string() << ": "
        << st.malformed << " of " << data_lines;
    throw DataError(msg.str());
  }
  return IngestEdges(edges, options, &st);
}

}  // namespace netdp
