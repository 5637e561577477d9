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


#ifndef NETDP_SYNTH_GEN_H_
#define NETDP_SYNTH_GEN_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "netdp/labels.h"

namespace netdp {

enum class UserGroup : std::uint8_t { kActive = 0, kInactive = 1, kNew = 2 };

std::string_view GroupName(UserGroup g);

struct SynthConfig {
  std::size_t num_nodes = 50000;
  std::size_t num_blocks = 4;
  // Edge probabilities within and across blocks, before degree multipliers.
  double p_in = 0.0036;
  double p_out = 0.0001;
  // Per-block base default probability; empty selects rates spread evenly
  // in log-odds between 0.01 and 0.08.
  std::vector<double> block_default_rates;
  // Odds multiplier applied per labeled-default neighbor.
  double neighbor_boost = 2.0;
  // Fraction of connected nodes that receive a label.
  double label_fraction = 0.3;
  // Scale of a per-node latent risk factor added to the log-odds; the
  // benchmark score observes it, the graph does not.
  double individual_risk = 1.0;
  // active, inactive, new
  std::array<double, 3> group_fractions{0.6, 0.25, 0.15};
  std::array<double, 3> group_degree_multipliers{1.25, 0.8, 0.8};
  // Standard deviation of the noise in the benchmark log-odds.
  double bench_noise = 0.5;
  std::uint64_t seed = 7;

  std::vector<double> EffectiveBlockRates() const;
  // Throws InvalidArgument for configs that cannot produce both classes or
  // every group.
  void Validate() const;
};

struct SynthData {
  std::size_t num_nodes = 0;
  std::vector<std::uint32_t> block;
  std::vector<UserGroup> group;
  std::vector<double> latent_risk;
  std::vector<double> bench;
  // Undirected edges (u < v); written out in both directions.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<RawLabel> labels;

  static std::string RawId(std::size_t node) { return std::to_string(node); }

  // edges.tsv, labels.csv, groups.csv, bench.csv and blocks.csv.
  void Write(const std::filesystem::path& dir) const;
};

// Degree-corrected stochastic block model with homophilous default labels.
// Labels are drawn in two passes: a base draw from the block rate (plus the
// latent risk), then a redraw whose odds are multiplied by neighbor_boost
// for every neighbor that defaulted in the first pass. Deterministic under
// cfg.seed.
SynthData GenerateSynthetic(const SynthConfig& cfg);

inline constexpr std::array<const char*, 9> kSynthPeriods{
    "201703", "201704", "201705", "201706", "201707",
    "201708", "201709", "201710", "201711"};
// Periods up to and including this one are training months.
inline constexpr const char* kLastTrainPeriod = "201707";

}  // namespace netdp

#endif  // NETDP_SYNTH_GEN_H_
