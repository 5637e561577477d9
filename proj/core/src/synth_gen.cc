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


#include "netdp/synth_gen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include <spdlog/spdlog.h>

namespace netdp {
namespace {

double Logit(double p) { return std::log(p / (1.0 - p)); }

// Number of trials skipped before the next success of a Bernoulli(p) stream.
std::uint64_t GeometricSkip(Rng& rng, double log_q) {
  if (log_q == -INFINITY) return 0;
  const double u = 1.0 - rng.Uniform();  // (0, 1]
  return static_cast<std::uint64_t>(std::floor(std::log(u) / log_q));
}

}  // namespace

std::string_view GroupName(UserGroup g) {
  switch (g) {
    case UserGroup::kActive:
      return "active";
    case UserGroup::kInactive:
      return "inactive";
    case UserGroup::kNew:
      return "new";
  }
  return "unknown";
}

std::vector<double> SynthConfig::EffectiveBlockRates() const {
  if (!block_default_rates.empty()) return block_default_rates;
  std::vector<double> rates(num_blocks);
  const double lo = Logit(0.01), hi = Logit(0.08);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const double t = num_blocks == 1 ? 0.5
                                     : static_cast<double>(b) /
                                           static_cast<double>(num_blocks - 1);
    rates[b] = Sigmoid(lo + t * (hi - lo));
  }
  return rates;
}

void SynthConfig::Validate() const {
  if (num_nodes < 2) throw InvalidArgument("synth: need at least two nodes");
  if (num_blocks == 0 || num_blocks > num_nodes) {
    throw InvalidArgument("synth: num_blocks must be in [1, num_nodes]");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_in) || !prob(p_out)) throw InvalidArgument("synth: p_in/p_out must be in [0, 1]");
  if (p_in == 0.0 && p_out == 0.0) throw InvalidArgument("synth: graph would have no edges");
  const auto rates = EffectiveBlockRates();
  if (rates.size() != num_blocks) {
    throw InvalidArgument("synth: need one default rate per block");
  }
  bool any_pos = false, any_neg = false;
  for (double r : rates) {
    if (!prob(r)) throw InvalidArgument("synth: default rates must be in [0, 1]");
    any_pos = any_pos || r > 0.0;
    any_neg = any_neg || r < 1.0;
  }
  if (!any_pos || !any_neg) {
    throw InvalidArgument("synth: default rates leave a class empty");
  }
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) {
    throw InvalidArgument("synth: label_fraction must be in (0, 1]");
  }
  if (!(neighbor_boost > 0.0)) throw InvalidArgument("synth: neighbor_boost must be > 0");
  if (individual_risk < 0.0 || bench_noise < 0.0) {
    throw InvalidArgument("synth: scales must be >= 0");
  }
  double total = 0.0;
  for (std::size_t g = 0; g < 3; ++g) {
    if (!(group_fractions[g] > 0.0)) {
      throw InvalidArgument("synth: group '" +
                            std::string(GroupName(static_cast<UserGroup>(g))) +
                            "' would be empty");
    }
    if (!(group_degree_multipliers[g] > 0.0)) {
      throw InvalidArgument("synth: degree multipliers must be > 0");
    }
    total += group_fractions[g];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("synth: group fractions must sum to 1");
}

SynthData GenerateSynthetic(const SynthConfig& cfg) {
  cfg.Validate();
  const std::size_t n = cfg.num_nodes;
  const auto rates = cfg.EffectiveBlockRates();
  SynthData data;
  data.num_nodes = n;
  data.block.resize(n);
  data.group.resize(n);
  data.latent_risk.resize(n);
  data.bench.resize(n);

  Rng node_rng(DeriveSeed(cfg.seed, 1));
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.block[i] = static_cast<std::uint32_t>(node_rng.UniformInt(cfg.num_blocks));
    const double u = node_rng.Uniform();
    std::size_t g = 0;
    if (u >= cfg.group_fractions[0]) g = u < cfg.group_fractions[0] + cfg.group_fractions[1] ? 1 : 2;
    data.group[i] = static_cast<UserGroup>(g);
    theta[i] = cfg.group_degree_multipliers[g];
    data.latent_risk[i] = node_rng.Normal();
  }

  // Edges: per block pair, geometric skipping over candidate pairs at the
  // largest possible probability, thinned to p * theta_i * theta_j.
  std::vector<std::vector<std::uint32_t>> members(cfg.num_blocks);
  for (std::uint32_t i = 0; i < n; ++i) members[data.block[i]].push_back(i);
  const double theta_max = *std::max_element(theta.begin(), theta.end());
  Rng edge_rng(DeriveSeed(cfg.seed, 2));
  for (std::size_t a = 0; a < cfg.num_blocks; ++a) {
    for (std::size_t b = a; b < cfg.num_blocks; ++b) {
      const double p = a == b ? cfg.p_in : cfg.p_out;
      if (p == 0.0) continue;
      const double p_max = std::min(1.0, p * theta_max * theta_max);
      const double log_q = std::log1p(-p_max);
      const auto& ma = members[a];
      const auto& mb = members[b];
      const std::uint64_t na = ma.size(), nb = mb.size();
      const std::uint64_t total = a == b ? na * (na - (na > 0 ? 1 : 0)) / 2 : na * nb;
      std::uint64_t t = GeometricSkip(edge_rng, log_q);
      // Row-major walk of the strict lower triangle (a == b) or the full
      // na x nb rectangle.
      std::uint64_t row = 1, row_start = 0;
      while (t < total) {
        std::uint32_t u, v;
        if (a == b) {
          while (t >= row_start + row) {
            row_start += row;
            ++row;
          }
          u = ma[row];
          v = ma[t - row_start];
        } else {
          u = ma[t / nb];
          v = mb[t % nb];
        }
        const double pij = std::min(1.0, p * theta[u] * theta[v]);
        if (pij >= p_max || edge_rng.Uniform() * p_max < pij) {
          data.edges.emplace_back(std::min(u, v), std::max(u, v));
        }
        t += 1 + GeometricSkip(edge_rng, log_q);
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [u, v] : data.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  // Labels on connected nodes only: every labeled node must exist in the
  // ingested graph.
  Rng label_rng(DeriveSeed(cfg.seed, 3));
  std::vector<std::uint32_t> labeled;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!adj[i].empty() && label_rng.Uniform() < cfg.label_fraction) labeled.push_back(i);
  }
  std::vector<double> base_logit(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rates[data.block[i]];
    const double logit = r <= 0.0 ? -INFINITY : r >= 1.0 ? INFINITY : Logit(r);
    base_logit[i] = logit + cfg.individual_risk * data.latent_risk[i];
  }
  // -1 unlabeled, else current label.
  std::vector<int> y(n, -1);
  for (auto i : labeled) y[i] = label_rng.Bernoulli(Sigmoid(base_logit[i])) ? 1 : 0;
  // The boost counts first-pass defaults, so the second pass cannot feed on
  // itself.
  const std::vector<int> first = y;
  const double log_boost = std::log(cfg.neighbor_boost);
  for (auto i : labeled) {
    int defaults = 0;
    for (auto j : adj[i]) defaults += first[j] == 1;
    y[i] = label_rng.Bernoulli(Sigmoid(base_logit[i] + defaults * log_boost)) ? 1 : 0;
  }
  for (auto i : labeled) {
    RawLabel l;
    l.raw_id = SynthData::RawId(i);
    l.y = y[i];
    l.period = kSynthPeriods[label_rng.UniformInt(kSynthPeriods.size())];
    l.split = l.period <= std::string(kLastTrainPeriod) ? Split::kTrain : Split::kTest;
    data.labels.push_back(std::move(l));
  }
  std::sort(data.labels.begin(), data.labels.end(), [](const RawLabel& a, const RawLabel& b) {
    return std::stoul(a.raw_id) < std::stoul(b.raw_id);
  });

  // Benchmark: sees the block rate and the latent risk through noise;
  // for new users it is pure noise.
  Rng bench_rng(DeriveSeed(cfg.seed, 4));
  for (std::size_t i = 0; i < n; ++i) {
    const double noise = bench_rng.Normal();
    if (data.group[i] == UserGroup::kNew) {
      data.bench[i] = Sigmoid(noise);
    } else {
      const double r = std::clamp(rates[data.block[i]], 1e-6, 1.0 - 1e-6);
      data.bench[i] = Sigmoid(Logit(r) + cfg.individual_risk * data.latent_risk[i] +
                              cfg.bench_noise * noise);
    }
  }

  std::size_t defaults = 0;
  for (const auto& l : data.labels) defaults += l.y;
  spdlog::info("gen_synth nodes={} edges={} labeled={} defaults={}", n, data.edges.size(),
               data.labels.size(), defaults);
  return data;
}

void SynthData::Write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    out << "# src\tdst\n";
    for (const auto& [u, v] : edges) {
      out << u << '\t' << v << '\n' << v << '\t' << u << '\n';
    }
    if (!out) throw DataError("cannot write edges.tsv");
  }
  WriteLabelsCsv(dir / "labels.csv", labels);
  {
    std::ofstream out(dir / "groups.csv");
    out << "raw_node_id,group\n";
    for (std::size_t i = 0; i < num_nodes; ++i) out << RawId(i) << ',' << GroupName(group[i]) << '\n';
  }
  {
    std::ofstream out(dir / "bench.csv");
    out << "raw_node_id,bench\n" << std::setprecision(17);
    for (std::size_t i = 0; i < num_nodes; ++i) out << RawId(i) << ',' << bench[i] << '\n';
  }
  {
    std::ofstream out(dir / "blocks.csv");
    out << "raw_node_id,block\n";
    for (std::size_t i = 0; i < num_nodes; ++i) out << RawId(i) << ',' << block[i] << '\n';
  }
}

}  // namespace netdp
