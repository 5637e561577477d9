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

#ifndef NETDP_TESTS_TEST_UTIL_H_
#define NETDP_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "netdp/graph_store.h"

namespace netdp::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("netdp_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Graph from (src, dst) raw-id pairs.
inline PartitionedGraph MakeGraph(const std::vector<std::pair<std::string, std::string>>& edges,
                                  IngestOptions options = {}) {
  std::vector<RawEdge> raw;
  for (const auto& [s, d] : edges) raw.push_back({s, d});
  return IngestEdges(raw, options);
}

// Directed Erdos-Renyi edges over `n` integer-named nodes.
inline std::vector<RawEdge> RandomEdges(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<RawEdge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    edges.push_back({std::to_string(pick(gen)), std::to_string(pick(gen))});
  }
  return edges;
}

// |a - b| relative to max(|a|, |b|, floor).
inline double RelErr(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace netdp::testing

#endif  // NETDP_TESTS_TEST_UTIL_H_
