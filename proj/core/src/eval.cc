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


#include "netdp/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace netdp {

double KsStatistic(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("KsStatistic: scores and labels differ in length");
  }
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument("KsStatistic: labels must be 0/1");
    if (!std::isfinite(scores[i])) throw InvalidArgument("KsStatistic: non-finite score");
    pos += labels[i];
  }
  const std::int64_t neg = static_cast<std::int64_t>(labels.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw InvalidArgument("KsStatistic: both classes are required");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // The gap |F_pos - F_neg| scaled by pos * neg stays an exact integer.
  std::int64_t cum_pos = 0, cum_neg = 0, best = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double value = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == value; ++i) {
      (labels[order[i]] == 1 ? cum_pos : cum_neg) += 1;
    }
    const std::int64_t gap = cum_pos * neg - cum_neg * pos;
    best = std::max(best, gap < 0 ? -gap : gap);
  }
  return static_cast<double>(best) / (static_cast<double>(pos) * static_cast<double>(neg));
}

LiftReport DefaultRateLift(const PartitionedGraph& g, const LabeledSet& labels,
                           std::size_t max_bucket) {
  if (labels.size() == 0) throw InvalidArgument("DefaultRateLift: no labels");
  std::vector<char> defaulted(g.num_nodes(), 0);
  for (const auto& r : labels.records) {
    if (r.y == 1) defaulted[r.node] = 1;
  }
  std::vector<std::size_t> nodes(max_bucket + 1, 0), defaults(max_bucket + 1, 0);
  std::set<NodeId> seen;
  for (const auto& r : labels.records) {
    if (!seen.insert(r.node).second) continue;
    std::size_t count = 0;
    for (NodeId u : g.Neighbors(r.node)) count += defaulted[u];
    const auto b = std::min(count, max_bucket);
    ++nodes[b];
    defaults[b] += r.y;
  }
  if (nodes[0] == 0) {
    throw DataError("DefaultRateLift: no labeled node without default neighbors");
  }
  LiftReport report;
  report.max_bucket = max_bucket;
  const double base = static_cast<double>(defaults[0]) / static_cast<double>(nodes[0]);
  for (std::size_t b = 0; b <= max_bucket; ++b) {
    if (nodes[b] == 0) continue;
    LiftBucket lb;
    lb.bucket = b;
    lb.nodes = nodes[b];
    lb.defaults = defaults[b];
    lb.default_rate = static_cast<double>(defaults[b]) / static_cast<double>(nodes[b]);
    lb.lift_percent = b == 0 ? 0.0
                      : base > 0.0
                          ? (lb.default_rate / base - 1.0) * 100.0
                          : std::numeric_limits<double>::infinity();
    report.buckets.push_back(lb);
  }
  return report;
}

std::string LiftReport::ToCsv() const {
  std::ostringstream out;
  out << "bucket,nodes,defaults,default_rate,lift_percent\n" << std::setprecision(10);
  for (const auto& b : buckets) {
    out << (b.bucket == max_bucket ? ">=" : "") << b.bucket << ',' << b.nodes << ','
        << b.defaults << ',' << b.default_rate << ',' << b.lift_percent << '\n';
  }
  return out.str();
}

std::vector<GroupStat> GroupNeighborStats(
    const PartitionedGraph& g, const std::unordered_map<NodeId, std::string>& groups,
    const std::vector<std::string>& expected_groups) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> acc;
  for (const auto& [node, group] : groups) {
    auto& [count, degree_sum] = acc[group];
    ++count;
    degree_sum += g.OutDegree(node);
  }
  std::vector<GroupStat> out;
  auto emit = [&](const std::string& name) {
    auto it = acc.find(name);
    if (it == acc.end() || it->second.first == 0) {
      spdlog::warn("group '{}' has no nodes; omitted", name);
      return;
    }
    out.push_back({name, it->second.first,
                   static_cast<double>(it->second.second) /
                       static_cast<double>(it->second.first)});
  };
  for (const auto& name : expected_groups) emit(name);
  for (const auto& [name, unused] : acc) {
    if (std::find(expected_groups.begin(), expected_groups.end(), name) ==
        expected_groups.end()) {
      emit(name);
    }
  }
  return out;
}

EvaluationReport Evaluate(const ScoreColumns& scores,
                          const std::vector<RawLabel>& labels,
                          const std::unordered_map<std::string, std::string>& groups,
                          const EvaluationOptions& options) {
  EvaluationReport report;
  std::vector<std::string> slice_order{"all"};
  std::set<std::string> group_names, periods;
  for (const auto& l : labels) {
    if (options.split && l.split != *options.split) continue;
    if (auto it = groups.find(l.raw_id); it != groups.end()) group_names.insert(it->second);
    periods.insert(l.period);
  }
  for (const auto& name : {"active", "inactive", "new"}) {
    if (group_names.erase(name)) slice_order.push_back(std::string("group=") + name);
  }
  for (const auto& name : group_names) slice_order.push_back("group=" + name);
  if (options.per_period) {
    for (const auto& p : periods) slice_order.push_back("period=" + p);
  }

  for (std::size_t c = 0; c < scores.names.size(); ++c) {
    const auto by_id = scores.AsMap(c);
    std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> slices;
    std::size_t missing = 0;
    for (const auto& l : labels) {
      if (options.split && l.split != *options.split) continue;
      auto it = by_id.find(l.raw_id);
      if (it == by_id.end()) {
        ++missing;
        continue;
      }
      auto add = [&](const std::string& slice) {
        slices[slice].first.push_back(it->second);
        slices[slice].second.push_back(l.y);
      };
      add("all");
      if (auto g = groups.find(l.raw_id); g != groups.end()) add("group=" + g->second);
      if (options.per_period) add("period=" + l.period);
    }
    report.missing[scores.names[c]] = missing;
    for (const auto& slice : slice_order) {
      KsRow row;
      row.score = scores.names[c];
      row.slice = slice;
      row.ks = std::numeric_limits<double>::quiet_NaN();
      if (auto it = slices.find(slice); it != slices.end()) {
        const auto& [s, y] = it->second;
        row.n = s.size();
        row.positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
        if (row.positives > 0 && row.positives < row.n) row.ks = KsStatistic(s, y);
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

std::string EvaluationReport::ToCsv() const {
  std::ostringstream out;
  out << "score,slice,n,positives,ks\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.score << ',' << r.slice << ',' << r.n << ',' << r.positives << ',';
    if (std::isnan(r.ks)) {
      out << "nan";
    } else {
      out << r.ks;
    }
    out << '\n';
  }
  return out.str();
}

std::string EvaluationReport::ToText() const {
  std::vector<std::string> score_names, slices;
  for (const auto& r : rows) {
    if (std::find(score_names.begin(), score_names.end(), r.score) == score_names.end()) {
      score_names.push_back(r.score);
    }
    if (std::find(slices.begin(), slices.end(), r.slice) == slices.end()) {
      slices.push_back(r.slice);
    }
  }
  std::ostringstream out;
  out << std::left << std::setw(20) << "KS";
  for (const auto& s : score_names) out << std::setw(14) << s;
  out << std::setw(10) << "n" << "positives\n";
  for (const auto& slice : slices) {
    out << std::setw(20) << slice;
    std::size_t n = 0, positives = 0;
    for (const auto& s : score_names) {
      for (const auto& r : rows) {
        if (r.score != s || r.slice != slice) continue;
        std::ostringstream cell;
        if (std::isnan(r.ks)) {
          cell << "n/a";
        } else {
          cell << std::fixed << std::setprecision(4) << r.ks;
        }
        out << std::setw(14) << cell.str();
        n = std::max(n, r.n);
        positives = std::max(positives, r.positives);
      }
    }
    out << std::setw(10) << n << positives << '\n';
  }
  return out.str();
}

double EvaluationReport::Ks(const std::string& score, const std::string& slice) const {
  for (const auto& r : rows) {
    if (r.score == score && r.slice == slice) return r.ks;
  }
  throw InvalidArgument("no KS row for " + score + " / " + slice);
}

}  // namespace netdp
