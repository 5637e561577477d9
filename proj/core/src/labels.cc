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


#include "netdp/labels.h"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace netdp {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double ParseDouble(const std::string& s, const std::string& context) {
  double v;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(context + ": not a number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string_view SplitName(Split s) { return s == Split::kTrain ? "train" : "test"; }

Split ParseSplit(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(s) + "'");
}

std::vector<LabeledRecord> LabeledSet::Select(Split split) const {
  std::vector<LabeledRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

void LabeledSet::Validate() const {
  std::set<std::string> train_periods, test_periods;
  for (const auto& r : records) {
    if (r.y != 0 && r.y != 1) throw DataError("labels must be 0 or 1");
    (r.split == Split::kTrain ? train_periods : test_periods).insert(r.period);
  }
  for (const auto& p : train_periods) {
    if (test_periods.contains(p)) {
      throw DataError("period " + p + " appears in both train and test");
    }
  }
}

std::size_t CsvTable::Column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("missing CSV column '" + std::string(name) + "'");
}

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = SplitLine(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(path.string() + ": row has " + std::to_string(cells.size()) +
                      " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (first) throw DataError(path.string() + ": empty CSV");
  return t;
}

std::vector<RawLabel> ReadLabelsCsv(const std::filesystem::path& path) {
  const auto t = ReadCsv(path);
  const auto c_id = t.Column("raw_node_id");
  const auto c_label = t.Column("label");
  const auto c_split = t.Column("split");
  const auto c_period = t.Column("period");
  std::vector<RawLabel> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    RawLabel l;
    l.raw_id = row[c_id];
    if (row[c_label] == "1") {
      l.y = 1;
    } else if (row[c_label] == "0") {
      l.y = 0;
    } else {
      throw DataError("label must be 0 or 1, got '" + row[c_label] + "'");
    }
    l.split = ParseSplit(row[c_split]);
    l.period = row[c_period];
    out.push_back(std::move(l));
  }
  return out;
}

void WriteLabelsCsv(const std::filesystem::path& path,
                    const std::vector<RawLabel>& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "raw_node_id,label,split,period\n";
  for (const auto& l : labels) {
    out << l.raw_id << ',' << l.y << ',' << SplitName(l.split) << ',' << l.period
        << '\n';
  }
}

LabeledSet ResolveLabels(const std::vector<RawLabel>& raw,
                         const PartitionedGraph& g) {
  LabeledSet set;
  set.records.reserve(raw.size());
  for (const auto& l : raw) {
    set.records.push_back({g.DenseId(l.raw_id), l.y, l.split, l.period});
  }
  set.Validate();
  return set;
}

std::unordered_map<std::string, double> ScoreColumns::AsMap(
    std::size_t column) const {
  std::unordered_map<std::string, double> m;
  m.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], columns.at(column)[i]);
  return m;
}

ScoreColumns ReadScoresCsv(const std::filesystem::path& path) {
  const auto t = ReadCsv(path);
  if (t.header.size() < 2 || t.header[0] != "raw_node_id") {
    throw DataError(path.string() + ": expected raw_node_id,<score>... header");
  }
  ScoreColumns s;
  s.names.assign(t.header.begin() + 1, t.header.end());
  s.columns.assign(s.names.size(), {});
  for (const auto& row : t.rows) {
    s.ids.push_back(row[0]);
    for (std::size_t c = 0; c < s.names.size(); ++c) {
      s.columns[c].push_back(ParseDouble(row[c + 1], path.string()));
    }
  }
  return s;
}

void WriteScoresCsv(const std::filesystem::path& path, const ScoreColumns& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "raw_node_id";
  for (const auto& n : s.names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < s.ids.size(); ++i) {
    out << s.ids[i];
    for (const auto& col : s.columns) out << ',' << col[i];
    out << '\n';
  }
}

std::unordered_map<std::string, std::string> ReadKeyValueCsv(
    const std::filesystem::path& path) {
  const auto t = ReadCsv(path);
  if (t.header.size() != 2) {
    throw DataError(path.string() + ": expected two columns");
  }
  std::unordered_map<std::string, std::string> m;
  m.reserve(t.rows.size());
  for (const auto& row : t.rows) m[row[0]] = row[1];
  return m;
}

}  // namespace netdp
