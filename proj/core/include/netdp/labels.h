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


#ifndef NETDP_LABELS_H_
#define NETDP_LABELS_H_

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "netdp/common.h"
#include "netdp/graph_store.h"

namespace netdp {

enum class Split { kTrain, kTest };

std::string_view SplitName(Split s);
Split ParseSplit(std::string_view s);

struct LabeledRecord {
  NodeId node = 0;
  int y = 0;
  Split split = Split::kTrain;
  std::string period;
};

// Default labels on a subset of nodes. Train and test periods are disjoint.
struct LabeledSet {
  std::vector<LabeledRecord> records;

  std::size_t size() const { return records.size(); }
  std::vector<LabeledRecord> Select(Split split) const;
  // Throws DataError when labels are not binary or a period is shared by
  // train and test records.
  void Validate() const;
};

// Label row as read from disk, before id resolution.
struct RawLabel {
  std::string raw_id;
  int y = 0;
  Split split = Split::kTrain;
  std::string period;
};

// Minimal comma-separated table: header plus string cells. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t Column(std::string_view name) const;
};

CsvTable ReadCsv(const std::filesystem::path& path);

// `raw_node_id,label,split,period` with a header line.
std::vector<RawLabel> ReadLabelsCsv(const std::filesystem::path& path);
void WriteLabelsCsv(const std::filesystem::path& path,
                    const std::vector<RawLabel>& labels);

// Maps raw ids onto graph node ids. Unknown ids are a DataError.
LabeledSet ResolveLabels(const std::vector<RawLabel>& raw,
                         const PartitionedGraph& g);

// Score file: `raw_node_id,<name>[,<name>...]`.
struct ScoreColumns {
  std::vector<std::string> names;
  std::vector<std::string> ids;
  // columns[c][row]
  std::vector<std::vector<double>> columns;

  std::unordered_map<std::string, double> AsMap(std::size_t column) const;
};

ScoreColumns ReadScoresCsv(const std::filesystem::path& path);
void WriteScoresCsv(const std::filesystem::path& path, const ScoreColumns& s);

// Two-column `raw_node_id,<value>` lookup (groups, bench scores).
std::unordered_map<std::string, std::string> ReadKeyValueCsv(
    const std::filesystem::path& path);

}  // namespace netdp

#endif  // NETDP_LABELS_H_
