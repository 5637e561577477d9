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

#include <gtest/gtest.h>

#include "test_util.h"

namespace netdp {
namespace {

using testing::MakeGraph;
using testing::TempDir;
using testing::WriteFile;

TEST(LabelsCsvTest, RoundTrip) {
  TempDir dir("labels");
  const std::vector<RawLabel> in{{"a", 1, Split::kTrain, "201703"},
                                 {"b", 0, Split::kTest, "201709"}};
  WriteLabelsCsv(dir.path() / "l.csv", in);
  const auto out = ReadLabelsCsv(dir.path() / "l.csv");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].raw_id, "a");
  EXPECT_EQ(out[0].y, 1);
  EXPECT_EQ(out[0].split, Split::kTrain);
  EXPECT_EQ(out[1].period, "201709");
  EXPECT_EQ(out[1].split, Split::kTest);
}

TEST(LabelsCsvTest, ColumnsMayAppearInAnyOrderAndCrlfIsAccepted) {
  TempDir dir("labels_order");
  WriteFile(dir.path() / "l.csv", "period,split,label,raw_node_id\r\n201703,train,1,x\r\n");
  const auto out = ReadLabelsCsv(dir.path() / "l.csv");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].raw_id, "x");
  EXPECT_EQ(out[0].y, 1);
}

TEST(LabelsCsvTest, RejectsBadInput) {
  TempDir dir("labels_bad");
  const auto p = dir.path() / "l.csv";
  WriteFile(p, "raw_node_id,label,split,period\na,2,train,1\n");
  EXPECT_THROW(ReadLabelsCsv(p), DataError);
  WriteFile(p, "raw_node_id,label,split,period\na,1,validation,1\n");
  EXPECT_THROW(ReadLabelsCsv(p), DataError);
  WriteFile(p, "raw_node_id,label,split\na,1,train\n");
  EXPECT_THROW(ReadLabelsCsv(p), DataError);
  WriteFile(p, "raw_node_id,label,split,period\na,1,train\n");
  EXPECT_THROW(ReadLabelsCsv(p), DataError);
  WriteFile(p, "");
  EXPECT_THROW(ReadLabelsCsv(p), DataError);
  EXPECT_THROW(ReadLabelsCsv(dir.path() / "missing.csv"), DataError);
}

TEST(LabeledSetTest, ValidateRejectsSharedPeriods) {
  LabeledSet set;
  set.records = {{0, 1, Split::kTrain, "m1"}, {1, 0, Split::kTest, "m1"}};
  EXPECT_THROW(set.Validate(), DataError);
  set.records[1].period = "m2";
  EXPECT_NO_THROW(set.Validate());
  set.records[0].y = 3;
  EXPECT_THROW(set.Validate(), DataError);
}

TEST(LabeledSetTest, SelectBySplit) {
  LabeledSet set;
  set.records = {{0, 1, Split::kTrain, "a"}, {1, 0, Split::kTest, "b"}, {2, 0, Split::kTrain, "a"}};
  const auto train = set.Select(Split::kTrain);
  ASSERT_EQ(train.size(), 2u);
  EXPECT_EQ(train[1].node, 2u);
  EXPECT_EQ(set.Select(Split::kTest).size(), 1u);
}

TEST(ResolveLabelsTest, MapsRawIdsAndRejectsUnknown) {
  const auto g = MakeGraph({{"x", "y"}, {"y", "z"}});
  const auto set = ResolveLabels({{"z", 1, Split::kTrain, "a"}, {"x", 0, Split::kTest, "b"}}, g);
  EXPECT_EQ(set.records[0].node, g.DenseId("z"));
  EXPECT_EQ(set.records[1].node, g.DenseId("x"));
  EXPECT_THROW(ResolveLabels({{"nope", 1, Split::kTrain, "a"}}, g), DataError);
}

TEST(ScoresCsvTest, RoundTripIsExact) {
  TempDir dir("scores");
  ScoreColumns s;
  s.names = {"netdp", "bench"};
  s.ids = {"a", "b"};
  s.columns = {{0.1, 1.0 / 3.0}, {2e-9, 0.999999999999}};
  WriteScoresCsv(dir.path() / "s.csv", s);
  const auto back = ReadScoresCsv(dir.path() / "s.csv");
  EXPECT_EQ(back.names, s.names);
  EXPECT_EQ(back.ids, s.ids);
  EXPECT_EQ(back.columns, s.columns);
  EXPECT_EQ(back.AsMap(1).at("b"), 0.999999999999);
}

TEST(ScoresCsvTest, RejectsNonNumericScores) {
  TempDir dir("scores_bad");
  WriteFile(dir.path() / "s.csv", "raw_node_id,y_hat\na,high\n");
  EXPECT_THROW(ReadScoresCsv(dir.path() / "s.csv"), DataError);
  WriteFile(dir.path() / "s.csv", "node,y_hat\na,0.5\n");
  EXPECT_THROW(ReadScoresCsv(dir.path() / "s.csv"), DataError);
}

TEST(KeyValueCsvTest, ReadsTwoColumns) {
  TempDir dir("kv");
  WriteFile(dir.path() / "g.csv", "raw_node_id,group\n1,active\n2,new\n");
  const auto m = ReadKeyValueCsv(dir.path() / "g.csv");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("2"), "new");
  WriteFile(dir.path() / "g.csv", "a,b,c\n1,2,3\n");
  EXPECT_THROW(ReadKeyValueCsv(dir.path() / "g.csv"), DataError);
}

}  // namespace
}  // namespace netdp
