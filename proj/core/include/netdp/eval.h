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


#ifndef NETDP_EVAL_H_
#define NETDP_EVAL_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netdp/graph_store.h"
#include "netdp/labels.h"

namespace netdp {

// Two-sample Kolmogorov-Smirnov statistic between the score distributions
// of positives (y == 1) and negatives (y == 0): the largest ECDF gap, taken
// only at distinct score values. Throws InvalidArgument unless both classes
// are present and every score is finite.
double KsStatistic(std::span<const double> scores, std::span<const int> labels);

struct LiftBucket {
  // Number of labeled-default neighbors; the last bucket means ">= bucket".
  std::size_t bucket = 0;
  std::size_t nodes = 0;
  std::size_t defaults = 0;
  double default_rate = 0.0;
  // (rate / rate of bucket 0 - 1) * 100.
  double lift_percent = 0.0;
};

struct LiftReport {
  std::size_t max_bucket = 0;
  // Non-empty buckets in ascending order; bucket 0 is always present.
  std::vector<LiftBucket> buckets;

  std::string ToCsv() const;
};

// Groups labeled nodes by how many of their out-neighbors carry a default
// label and compares each group's default rate with the zero group.
LiftReport DefaultRateLift(const PartitionedGraph& g, const LabeledSet& labels,
                           std::size_t max_bucket);

struct GroupStat {
  std::string group;
  std::size_t nodes = 0;
  double mean_degree = 0.0;
};

// Mean out-degree per group, in the order of `expected_groups` followed by
// any other group names seen. Expected groups with no nodes are omitted
// with a warning.
std::vector<GroupStat> GroupNeighborStats(
    const PartitionedGraph& g, const std::unordered_map<NodeId, std::string>& groups,
    const std::vector<std::string>& expected_groups = {"active", "inactive", "new"});

struct KsRow {
  std::string score;
  // "all", "group=<name>" or "period=<tag>".
  std::string slice;
  std::size_t n = 0;
  std::size_t positives = 0;
  // NaN when the slice lacks one of the classes.
  double ks = 0.0;
};

struct EvaluationOptions {
  // Which labeled records are scored; nullopt means every record.
  std::optional<Split> split = Split::kTest;
  bool per_period = false;
};

struct EvaluationReport {
  std::vector<KsRow> rows;
  // Labeled records without a score, per score column.
  std::map<std::string, std::size_t> missing;

  std::string ToCsv() const;
  // One line per slice, one column per score.
  std::string ToText() const;
  double Ks(const std::string& score, const std::string& slice) const;
};

// KS of every score column overall, per group (when `groups` is non-empty)
// and per period (when requested).
EvaluationReport Evaluate(const ScoreColumns& scores,
                          const std::vector<RawLabel>& labels,
                          const std::unordered_map<std::string, std::string>& groups,
                          const EvaluationOptions& options);

}  // namespace netdp

#endif  // NETDP_EVAL_H_
