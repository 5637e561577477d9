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


#ifndef NETDP_ENSEMBLE_H_
#define NETDP_ENSEMBLE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netdp/common.h"
#include "netdp/labels.h"
#include "netdp/unsup_embed.h"

namespace netdp {

// [u_1 .. u_d, y_hat] for one labeled node.
struct FeatureRow {
  NodeId node = 0;
  std::vector<double> x;
  int y = 0;
  Split split = Split::kTrain;
  std::string period;
};

struct FeatureBuildStats {
  std::size_t labeled = 0;
  std::size_t missing_embedding = 0;
  std::size_t missing_score = 0;

  std::size_t dropped() const { return missing_embedding + missing_score; }
};

struct FeatureOptions {
  // Abort when more than this fraction of labeled records is dropped.
  double max_drop_rate = 0.05;
  // Optional extension: append the supervised representation as well.
  const EmbeddingTable* sup_embedding = nullptr;
};

// One row per labeled record that has both an embedding row and a
// supervised score. Records lacking either are dropped and counted.
std::vector<FeatureRow> BuildFeatures(
    const EmbeddingTable& emb, const std::unordered_map<NodeId, double>& sup_scores,
    const LabeledSet& labels, const FeatureOptions& options = {},
    FeatureBuildStats* stats = nullptr);

struct TreeNode {
  // -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;
};

// Binary regression tree; x[feature] <= threshold routes left.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double Predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

// sigmoid(base_score + shrinkage * sum_t tree_t(x)), trees in training order.
class Forest {
 public:
  Forest() = default;
  Forest(std::size_t num_features, double base_score, double shrinkage)
      : num_features_(num_features), base_score_(base_score), shrinkage_(shrinkage) {}

  std::size_t num_features() const { return num_features_; }
  double base_score() const { return base_score_; }
  double shrinkage() const { return shrinkage_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  void AddTree(RegressionTree tree) { trees_.push_back(std::move(tree)); }

  double Margin(std::span<const double> x) const;
  // Throws InvalidArgument on a feature-count mismatch.
  double Predict(std::span<const double> x) const;
  std::vector<double> PredictBatch(std::span<const FeatureRow> rows) const;

 private:
  std::size_t num_features_ = 0;
  double base_score_ = 0.0;
  double shrinkage_ = 0.1;
  std::vector<RegressionTree> trees_;
};

struct MartConfig {
  std::size_t num_trees = 200;
  std::size_t max_depth = 4;
  double shrinkage = 0.1;
  std::size_t min_leaf = 20;
};

struct SplitChoice {
  std::int32_t feature = -1;
  double threshold = 0.0;
  // Reduction of the summed squared error of the targets.
  double gain = 0.0;
  std::size_t left_count = 0;
};

// Exact greedy search over every feature for the split of `rows` that best
// reduces the squared error of `targets`. Candidate thresholds lie halfway
// between consecutive distinct values; both sides need at least `min_leaf`
// rows. Ties keep the lowest feature, then the lowest threshold. feature ==
// -1 when no split has positive gain.
SplitChoice FindBestSplit(std::span<const FeatureRow> data,
                          std::span<const std::uint32_t> rows,
                          std::span<const double> targets, std::size_t min_leaf);

struct MartTrace {
  // Mean training logistic loss; entry 0 for the base score, entry t after
  // tree t.
  std::vector<double> losses;
};

// Gradient boosting with logistic loss. Each tree is grown on the residuals
// y - sigmoid(margin) with FindBestSplit; leaf values are Newton steps,
// halved while they would raise the loss of their leaf, so the training
// loss never increases.
Forest TrainMart(std::span<const FeatureRow> rows, const MartConfig& cfg,
                 MartTrace* trace = nullptr);

double LogisticLoss(double margin, int y);

// w * netdp + (1 - w) * bench. Throws InvalidArgument for w or scores
// outside [0, 1].
double Blend(double netdp_score, double bench_score, double w);

struct BlendSelection {
  double weight = 1.0;
  double ks = 0.0;
  std::vector<double> grid;
  std::vector<double> grid_ks;
};

// Evaluates KS of the blend at w = 0, step, 2 * step, ..., 1 and keeps the
// first weight reaching the maximum.
BlendSelection SelectBlendWeight(std::span<const double> netdp,
                                 std::span<const double> bench,
                                 std::span<const int> labels, double step = 0.05);

// Forest plus the blend weight and feature layout, serialized as a
// version-tagged binary file. Save then Load reproduces every double bit
// for bit.
struct EnsembleModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  Forest forest;
  double blend_weight = 1.0;
  bool include_sup_embedding = false;

  void Save(const std::filesystem::path& path) const;
  static EnsembleModel Load(const std::filesystem::path& path);
};

}  // namespace netdp

#endif  // NETDP_ENSEMBLE_H_
