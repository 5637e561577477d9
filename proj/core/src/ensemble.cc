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


#include "netdp/ensemble.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "netdp/binary_io.h"
#include "netdp/eval.h"

namespace netdp {
namespace {

constexpr double kMinGain = 1e-12;

// Scans one feature whose rows arrive sorted by value and updates `best`
// when a split beats it.
void ScanFeature(std::int32_t feature, std::span<const std::uint32_t> sorted,
                 std::span<const FeatureRow> data, std::span<const double> targets,
                 double total, std::size_t min_leaf, SplitChoice& best) {
  const std::size_t n = sorted.size();
  const double dn = static_cast<double>(n);
  const auto f = static_cast<std::size_t>(feature);
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_sum += targets[sorted[i]];
    const double v = data[sorted[i]].x[f];
    const double next = data[sorted[i + 1]].x[f];
    const std::size_t nl = i + 1;
    if (v == next || nl < min_leaf || n - nl < min_leaf) continue;
    const double right_sum = total - left_sum;
    const double dl = static_cast<double>(nl);
    const double gain = left_sum * left_sum / dl +
                        right_sum * right_sum / (dn - dl) - total * total / dn;
    if (gain > best.gain && gain > kMinGain) {
      double threshold = v + (next - v) / 2.0;
      if (!(threshold < next)) threshold = v;
      best = {feature, threshold, gain, nl};
    }
  }
}

void SortByFeature(std::vector<std::uint32_t>& rows, std::span<const FeatureRow> data,
                   std::size_t f) {
  std::stable_sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
    return data[a].x[f] < data[b].x[f];
  });
}

class TreeGrower {
 public:
  TreeGrower(std::span<const FeatureRow> data, std::span<const double> residuals,
             std::span<const double> hessians, std::span<double> margins,
             const MartConfig& cfg)
      : data_(data),
        residuals_(residuals),
        hessians_(hessians),
        margins_(margins),
        cfg_(cfg),
        goes_left_(data.size(), 0) {}

  RegressionTree Grow(std::vector<std::vector<std::uint32_t>> sorted) {
    nodes_.clear();
    Build(std::move(sorted), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  std::uint32_t Build(std::vector<std::vector<std::uint32_t>> sorted,
                      std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    const auto& rows = sorted.front();
    const std::size_t min_leaf = std::max<std::size_t>(cfg_.min_leaf, 1);
    SplitChoice best;
    if (depth < cfg_.max_depth && rows.size() >= 2 * min_leaf) {
      double total = 0.0;
      for (auto r : rows) total += residuals_[r];
      for (std::size_t f = 0; f < sorted.size(); ++f) {
        ScanFeature(static_cast<std::int32_t>(f), sorted[f], data_, residuals_, total,
                    min_leaf, best);
      }
    }
    if (best.feature < 0) {
      nodes_[id].value = LeafValue(rows);
      return id;
    }
    const auto f = static_cast<std::size_t>(best.feature);
    for (auto r : rows) goes_left_[r] = data_[r].x[f] <= best.threshold;
    std::vector<std::vector<std::uint32_t>> left(sorted.size()), right(sorted.size());
    for (std::size_t g = 0; g < sorted.size(); ++g) {
      left[g].reserve(best.left_count);
      right[g].reserve(rows.size() - best.left_count);
      for (auto r : sorted[g]) (goes_left_[r] ? left[g] : right[g]).push_back(r);
    }
    sorted.clear();
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const auto l = Build(std::move(left), depth + 1);
    const auto r = Build(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Newton step on the leaf, halved until the leaf's loss does not rise.
  // Applies the shrunken step to the margins of the leaf's rows.
  double LeafValue(std::span<const std::uint32_t> rows) {
    double g = 0.0, h = 0.0, before = 0.0;
    for (auto r : rows) {
      g += residuals_[r];
      h += hessians_[r];
      before += LogisticLoss(margins_[r], data_[r].y);
    }
    double value = g / std::max(h, 1e-12);
    for (int attempt = 0; attempt < 60 && value != 0.0; ++attempt) {
      const double step = cfg_.shrinkage * value;
      double after = 0.0;
      for (auto r : rows) after += LogisticLoss(margins_[r] + step, data_[r].y);
      if (after <= before) break;
      value /= 2.0;
      if (attempt == 59) value = 0.0;
    }
    const double step = cfg_.shrinkage * value;
    for (auto r : rows) margins_[r] += step;
    return value;
  }

  std::span<const FeatureRow> data_;
  std::span<const double> residuals_;
  std::span<const double> hessians_;
  std::span<double> margins_;
  const MartConfig& cfg_;
  std::vector<char> goes_left_;
  std::vector<TreeNode> nodes_;
};

double MeanLoss(std::span<const double> margins, std::span<const FeatureRow> rows) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) total += LogisticLoss(margins[i], rows[i].y);
  return total / static_cast<double>(rows.size());
}

}  // namespace

std::vector<FeatureRow> BuildFeatures(
    const EmbeddingTable& emb, const std::unordered_map<NodeId, double>& sup_scores,
    const LabeledSet& labels, const FeatureOptions& options, FeatureBuildStats* stats) {
  FeatureBuildStats local;
  FeatureBuildStats& st = stats ? *stats : local;
  st = {};
  st.labeled = labels.size();
  const auto* sup_emb = options.sup_embedding;
  std::vector<FeatureRow> out;
  out.reserve(labels.size());
  for (const auto& r : labels.records) {
    if (r.node >= emb.rows() || (sup_emb && r.node >= sup_emb->rows())) {
      ++st.missing_embedding;
      continue;
    }
    auto it = sup_scores.find(r.node);
    if (it == sup_scores.end()) {
      ++st.missing_score;
      continue;
    }
    FeatureRow row;
    row.node = r.node;
    row.y = r.y;
    row.split = r.split;
    row.period = r.period;
    const auto u = emb.row(r.node);
    row.x.assign(u.begin(), u.end());
    row.x.push_back(it->second);
    if (sup_emb) {
      const auto s = sup_emb->row(r.node);
      row.x.insert(row.x.end(), s.begin(), s.end());
    }
    if (!AllFinite(row.x)) throw DataError("non-finite feature for a labeled node");
    out.push_back(std::move(row));
  }
  if (st.labeled > 0 && static_cast<double>(st.dropped()) >
                            options.max_drop_rate * static_cast<double>(st.labeled)) {
    throw DataError("build_features dropped " + std::to_string(st.dropped()) + " of " +
                    std::to_string(st.labeled) + " labeled nodes");
  }
  if (st.dropped() > 0) {
    spdlog::warn("build_features dropped={} (missing_embedding={} missing_score={})",
                 st.dropped(), st.missing_embedding, st.missing_score);
  }
  return out;
}

double RegressionTree::Predict(std::span<const double> x) const {
  if (nodes_.empty()) return 0.0;
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[i].feature >= 0) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return deepest;
}

double Forest::Margin(std::span<const double> x) const {
  if (x.size() != num_features_) {
    throw InvalidArgument("Forest: expected " + std::to_string(num_features_) +
                          " features, got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.Predict(x);
  return base_score_ + shrinkage_ * sum;
}

double Forest::Predict(std::span<const double> x) const { return Sigmoid(Margin(x)); }

std::vector<double> Forest::PredictBatch(std::span<const FeatureRow> rows) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = Predict(rows[i].x);
  return out;
}

SplitChoice FindBestSplit(std::span<const FeatureRow> data,
                          std::span<const std::uint32_t> rows,
                          std::span<const double> targets, std::size_t min_leaf) {
  SplitChoice best;
  if (rows.empty()) return best;
  min_leaf = std::max<std::size_t>(min_leaf, 1);
  double total = 0.0;
  for (auto r : rows) total += targets[r];
  const std::size_t num_features = data[rows.front()].x.size();
  std::vector<std::uint32_t> sorted(rows.begin(), rows.end());
  for (std::size_t f = 0; f < num_features; ++f) {
    std::sort(sorted.begin(), sorted.end());
    SortByFeature(sorted, data, f);
    ScanFeature(static_cast<std::int32_t>(f), sorted, data, targets, total, min_leaf,
                best);
  }
  return best;
}

double LogisticLoss(double margin, int y) {
  return y == 1 ? -LogSigmoid(margin) : -LogSigmoid(-margin);
}

Forest TrainMart(std::span<const FeatureRow> rows, const MartConfig& cfg,
                 MartTrace* trace) {
  if (rows.empty()) throw InvalidArgument("TrainMart: no rows");
  if (cfg.num_trees == 0) throw InvalidArgument("TrainMart: num_trees must be >= 1");
  if (!(cfg.shrinkage > 0.0)) throw InvalidArgument("TrainMart: shrinkage must be > 0");
  const std::size_t num_features = rows.front().x.size();
  std::size_t positives = 0;
  for (const auto& r : rows) {
    if (r.x.size() != num_features) throw InvalidArgument("TrainMart: ragged features");
    positives += r.y;
  }
  if (positives == 0 || positives == rows.size()) {
    throw DataError("TrainMart: both classes must be present");
  }
  const double p = static_cast<double>(positives) / static_cast<double>(rows.size());
  Forest forest(num_features, std::log(p / (1.0 - p)), cfg.shrinkage);

  const std::size_t n = rows.size();
  std::vector<double> margins(n, forest.base_score());
  std::vector<double> residuals(n), hessians(n);

  std::vector<std::vector<std::uint32_t>> presorted(num_features);
  for (std::size_t f = 0; f < num_features; ++f) {
    auto& idx = presorted[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    SortByFeature(idx, rows, f);
  }

  if (trace) trace->losses.assign(1, MeanLoss(margins, rows));
  TreeGrower grower(rows, residuals, hessians, margins, cfg);
  for (std::size_t t = 0; t < cfg.num_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = Sigmoid(margins[i]);
      residuals[i] = rows[i].y - s;
      hessians[i] = s * (1.0 - s);
    }
    forest.AddTree(grower.Grow(presorted));
    if (trace) trace->losses.push_back(MeanLoss(margins, rows));
  }
  spdlog::info("train_mart trees={} rows={} features={} final_loss={:.6f}",
               cfg.num_trees, n, num_features, MeanLoss(margins, rows));
  return forest;
}

double Blend(double netdp_score, double bench_score, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("Blend: weight must be in [0, 1]");
  if (!(netdp_score >= 0.0 && netdp_score <= 1.0) ||
      !(bench_score >= 0.0 && bench_score <= 1.0)) {
    throw InvalidArgument("Blend: scores must be in [0, 1]");
  }
  return w * netdp_score + (1.0 - w) * bench_score;
}

BlendSelection SelectBlendWeight(std::span<const double> netdp,
                                 std::span<const double> bench,
                                 std::span<const int> labels, double step) {
  if (netdp.size() != bench.size() || netdp.size() != labels.size()) {
    throw InvalidArgument("SelectBlendWeight: length mismatch");
  }
  if (!(step > 0.0 && step <= 1.0)) throw InvalidArgument("SelectBlendWeight: bad step");
  const auto points = static_cast<std::size_t>(std::llround(1.0 / step));
  BlendSelection sel;
  sel.ks = -1.0;
  std::vector<double> blended(netdp.size());
  for (std::size_t i = 0; i <= points; ++i) {
    const double w = std::min(1.0, static_cast<double>(i) * step);
    for (std::size_t j = 0; j < netdp.size(); ++j) blended[j] = Blend(netdp[j], bench[j], w);
    const double ks = KsStatistic(blended, labels);
    sel.grid.push_back(w);
    sel.grid_ks.push_back(ks);
    if (ks > sel.ks) {
      sel.ks = ks;
      sel.weight = w;
    }
  }
  return sel;
}

void EnsembleModel::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  BinaryWriter w(path);
  w.WriteBytes("NDPF");
  w.WriteU32(kFormatVersion);
  w.WriteU64(forest.num_features());
  w.WriteF64(forest.base_score());
  w.WriteF64(forest.shrinkage());
  w.WriteF64(blend_weight);
  w.WriteU32(include_sup_embedding ? 1 : 0);
  w.WriteU64(forest.trees().size());
  for (const auto& tree : forest.trees()) {
    w.WriteU64(tree.nodes().size());
    for (const auto& n : tree.nodes()) {
      w.WriteU32(static_cast<std::uint32_t>(n.feature));
      w.WriteF64(n.threshold);
      w.WriteU32(n.left);
      w.WriteU32(n.right);
      w.WriteF64(n.value);
    }
  }
  w.Close();
}

EnsembleModel EnsembleModel::Load(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.ExpectHeader("NDPF", kFormatVersion);
  const auto num_features = r.ReadU64();
  const double base = r.ReadF64();
  const double shrinkage = r.ReadF64();
  EnsembleModel m;
  m.blend_weight = r.ReadF64();
  m.include_sup_embedding = r.ReadU32() != 0;
  m.forest = Forest(num_features, base, shrinkage);
  const auto num_trees = r.ReadU64();
  for (std::uint64_t t = 0; t < num_trees; ++t) {
    const auto count = r.ReadU64();
    if (count == 0 || count > (1u << 24)) throw DataError("corrupt tree in " + path.string());
    std::vector<TreeNode> nodes(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      auto& n = nodes[i];
      n.feature = static_cast<std::int32_t>(r.ReadU32());
      n.threshold = r.ReadF64();
      n.left = r.ReadU32();
      n.right = r.ReadU32();
      n.value = r.ReadF64();
      if (n.feature >= 0 && (static_cast<std::uint64_t>(n.feature) >= num_features ||
                             n.left >= count || n.right >= count ||
                             n.left <= i || n.right <= i)) {
        throw DataError("corrupt tree node in " + path.string());
      }
    }
    m.forest.AddTree(RegressionTree(std::move(nodes)));
  }
  return m;
}

}  // namespace netdp
