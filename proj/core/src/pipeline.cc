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


#include "netdp/pipeline.h"

#include <algorithm>
#include <chrono>
#include <fstream>

#include <spdlog/spdlog.h>

namespace netdp {
namespace {

std::unordered_map<std::string, std::size_t> IndexOf(std::span<const std::string> ids) {
  std::unordered_map<std::string, std::size_t> m;
  m.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], i);
  return m;
}

// Labels keyed by row index of `ids`; unknown ids get the out-of-range id
// ids.size() so feature building counts them as missing.
LabeledSet LabelsByRow(const std::vector<RawLabel>& labels,
                       const std::unordered_map<std::string, std::size_t>& index,
                       std::size_t rows) {
  LabeledSet set;
  for (const auto& l : labels) {
    auto it = index.find(l.raw_id);
    set.records.push_back({it == index.end() ? rows : it->second, l.y, l.split, l.period});
  }
  set.Validate();
  return set;
}

// Each train row scored by a forest fitted without its fold. Folds come
// from a fixed shuffle, so the result depends only on the rows.
std::vector<double> OutOfFoldPredictions(std::span<const FeatureRow> train,
                                         const MartConfig& mart, std::size_t folds) {
  std::vector<std::size_t> fold(train.size());
  for (std::size_t i = 0; i < fold.size(); ++i) fold[i] = i % folds;
  Rng rng(0x0f01d);
  rng.Shuffle(fold);
  std::vector<double> out(train.size());
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<FeatureRow> fit;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (fold[i] != f) fit.push_back(train[i]);
    }
    const Forest forest = TrainMart(fit, mart);
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (fold[i] == f) out[i] = forest.Predict(train[i].x);
    }
  }
  return out;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace

std::unordered_map<std::string, double> ReadBenchScores(const std::filesystem::path& path) {
  const auto cols = ReadScoresCsv(path);
  if (cols.names.size() != 1) throw DataError(path.string() + ": expected raw_node_id,<score>");
  return cols.AsMap(0);
}

EnsembleInputs LoadEnsembleInputs(const std::filesystem::path& emb_path,
                                  const std::filesystem::path& sup_scores_path,
                                  const std::vector<RawLabel>& labels,
                                  const std::filesystem::path& sup_emb_path) {
  EnsembleInputs in;
  in.embedding = EmbeddingTable::Load(emb_path, &in.raw_ids);
  const auto index = IndexOf(in.raw_ids);

  const auto sup = ReadScoresCsv(sup_scores_path);
  std::size_t column = 0;
  for (std::size_t c = 0; c < sup.names.size(); ++c) {
    if (sup.names[c] == "y_hat") column = c;
  }
  std::unordered_map<NodeId, double> sup_scores;
  for (std::size_t i = 0; i < sup.ids.size(); ++i) {
    if (auto it = index.find(sup.ids[i]); it != index.end()) {
      sup_scores.emplace(it->second, sup.columns[column][i]);
    }
  }

  EmbeddingTable sup_emb;
  FeatureOptions options;
  if (!sup_emb_path.empty()) {
    std::vector<std::string> sup_ids;
    const auto loaded = EmbeddingTable::Load(sup_emb_path, &sup_ids);
    sup_emb = EmbeddingTable(in.embedding.rows(), loaded.dim());
    for (std::size_t i = 0; i < sup_ids.size(); ++i) {
      if (auto it = index.find(sup_ids[i]); it != index.end()) {
        const auto src = loaded.row(i);
        std::copy(src.begin(), src.end(), sup_emb.row(it->second).begin());
      }
    }
    options.sup_embedding = &sup_emb;
  }
  LabeledSet set;
  if (labels.empty()) {
    // Unlabeled scoring: one row per node that has a supervised score.
    for (std::size_t v = 0; v < in.embedding.rows(); ++v) {
      if (sup_scores.contains(v)) set.records.push_back({v, 0, Split::kTest, ""});
    }
  } else {
    set = LabelsByRow(labels, index, in.embedding.rows());
  }
  in.rows = BuildFeatures(in.embedding, sup_scores, set, options, &in.stats);
  return in;
}

EnsembleTraining TrainEnsemble(std::span<const FeatureRow> rows,
                               std::span<const std::string> raw_ids,
                               const MartConfig& mart,
                               const std::unordered_map<std::string, double>* bench,
                               double blend_step, std::size_t blend_folds) {
  std::vector<FeatureRow> train;
  for (const auto& r : rows) {
    if (r.split == Split::kTrain) train.push_back(r);
  }
  EnsembleTraining out;
  out.model.forest = TrainMart(train, mart, &out.trace);
  out.model.blend_weight = 1.0;
  if (bench) {
    out.has_bench = true;
    std::vector<double> bench_scores;
    std::vector<int> y;
    for (const auto& r : train) {
      auto it = bench->find(raw_ids[r.node]);
      if (it == bench->end()) throw DataError("no bench score for " + raw_ids[r.node]);
      bench_scores.push_back(it->second);
      y.push_back(r.y);
    }
    const auto netdp = blend_folds >= 2 ? OutOfFoldPredictions(train, mart, blend_folds)
                                        : out.model.forest.PredictBatch(train);
    out.blend = SelectBlendWeight(netdp, bench_scores, y, blend_step);
    out.model.blend_weight = out.blend.weight;
    spdlog::info("blend weight={:.2f} train_ks={:.4f}", out.blend.weight, out.blend.ks);
  }
  return out;
}

ScoreColumns PredictEnsemble(const EnsembleModel& model, std::span<const FeatureRow> rows,
                             std::span<const std::string> raw_ids,
                             const std::unordered_map<std::string, double>* bench) {
  ScoreColumns out;
  out.names = {"netdp"};
  if (bench) {
    out.names.push_back("bench");
    out.names.push_back("netdp_bench");
  }
  out.columns.assign(out.names.size(), {});
  for (const auto& r : rows) {
    const auto& raw = raw_ids[r.node];
    const double p = model.forest.Predict(r.x);
    double b = 0.0;
    if (bench) {
      auto it = bench->find(raw);
      if (it == bench->end()) continue;
      b = it->second;
    }
    out.ids.push_back(raw);
    out.columns[0].push_back(p);
    if (bench) {
      out.columns[1].push_back(b);
      out.columns[2].push_back(Blend(p, b, model.blend_weight));
    }
  }
  return out;
}

void CrossFitSupScores(const PartitionedGraph& g, const LabeledSet& labels,
                       const SupConfig& cfg, std::size_t folds, SupResult& result) {
  if (folds < 2) throw InvalidArgument("cross-fitting needs at least two folds");
  std::vector<NodeId> train_nodes;
  for (const auto& r : labels.records) {
    if (r.split == Split::kTrain) train_nodes.push_back(r.node);
  }
  std::sort(train_nodes.begin(), train_nodes.end());
  train_nodes.erase(std::unique(train_nodes.begin(), train_nodes.end()), train_nodes.end());
  Rng rng(DeriveSeed(cfg.seed, 0xc10f));
  rng.Shuffle(train_nodes);
  std::unordered_map<NodeId, std::size_t> fold_of;
  for (std::size_t i = 0; i < train_nodes.size(); ++i) fold_of.emplace(train_nodes[i], i % folds);

  std::unordered_map<NodeId, std::size_t> position;
  for (std::size_t i = 0; i < result.nodes.size(); ++i) position.emplace(result.nodes[i], i);
  for (std::size_t f = 0; f < folds; ++f) {
    LabeledSet fit;
    std::vector<NodeId> held;
    for (const auto& r : labels.records) {
      if (r.split != Split::kTrain) continue;
      if (fold_of.at(r.node) == f) {
        held.push_back(r.node);
      } else {
        fit.records.push_back(r);
      }
    }
    spdlog::info("train_sup cross_fit fold={} fit={} held_out={}", f, fit.size(), held.size());
    auto stores = MakeSupStores(g, cfg);
    const auto fold_result = TrainSup(g, fit, stores, cfg);
    const auto preds = PredictNodes(g, fold_result.params, held);
    for (std::size_t i = 0; i < held.size(); ++i) result.scores[position.at(held[i])] = preds[i];
  }
}

PipelineReport RunPipeline(const RunConfig& cfg) {
  PipelineReport report;
  const auto& out = cfg.out_dir;
  std::filesystem::create_directories(out);
  auto clock = std::chrono::steady_clock::now();
  auto timed = [&](const std::string& stage, auto&& fn) {
    spdlog::info("stage={} status=start", stage);
    RunStage(stage, fn);
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - clock).count();
    clock = now;
    report.stage_seconds.emplace_back(stage, secs);
    spdlog::info("stage={} status=done seconds={:.3f}", stage, secs);
  };

  std::filesystem::path edges = cfg.edges, labels_path = cfg.labels,
                        groups_path = cfg.groups, bench_path = cfg.bench;
  if (cfg.generate) {
    timed("gen-synth", [&] {
      const auto data = GenerateSynthetic(cfg.synth);
      data.Write(out / "synth");
    });
    edges = out / "synth" / "edges.tsv";
    labels_path = out / "synth" / "labels.csv";
    groups_path = out / "synth" / "groups.csv";
    bench_path = out / "synth" / "bench.csv";
  }

  PartitionedGraph graph;
  timed("ingest", [&] {
    IngestStats stats;
    graph = IngestEdgeFile(edges, cfg.ingest, &stats);
    graph.Save(out / "graph");
    spdlog::info("ingest nodes={} edges={} malformed={} duplicates={} self_loops={}",
                 graph.num_nodes(), graph.num_edges(), stats.malformed, stats.duplicates,
                 stats.self_loops);
  });

  std::vector<RawLabel> raw_labels;
  LabeledSet labels;
  std::unordered_map<std::string, std::string> groups;
  RunStage("load-labels", [&] {
    raw_labels = ReadLabelsCsv(labels_path);
    labels = ResolveLabels(raw_labels, graph);
    if (!groups_path.empty()) groups = ReadKeyValueCsv(groups_path);
  });

  EmbeddingTable unsup_table;
  timed("train-unsup", [&] {
    auto store = MakeUnsupStore(graph, cfg.unsup);
    auto result = TrainUnsup(graph, *store, cfg.unsup);
    unsup_table = std::move(result.table);
    unsup_table.Save(out / "unsup.emb", graph.raw_ids());
  });

  std::unordered_map<NodeId, double> sup_scores;
  EmbeddingTable sup_rep;
  timed("train-sup", [&] {
    auto stores = MakeSupStores(graph, cfg.sup);
    auto result = TrainSup(graph, labels, stores, cfg.sup);
    if (cfg.sup_folds >= 2) {
      CrossFitSupScores(graph, labels, cfg.sup, cfg.sup_folds, result);
    }
    ScoreColumns cols;
    cols.names = {"y_hat"};
    cols.columns.assign(1, {});
    for (std::size_t i = 0; i < result.nodes.size(); ++i) {
      sup_scores.emplace(result.nodes[i], result.scores[i]);
      cols.ids.push_back(graph.RawId(result.nodes[i]));
      cols.columns[0].push_back(result.scores[i]);
    }
    WriteScoresCsv(out / "sup_scores.csv", cols);
    if (cfg.include_sup_embedding) {
      std::vector<NodeId> all(graph.num_nodes());
      for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
      sup_rep = RepresentNodes(graph, result.params, all);
      sup_rep.Save(out / "sup_rep.emb", graph.raw_ids());
    }
  });

  std::vector<FeatureRow> rows;
  timed("build-features", [&] {
    FeatureOptions options;
    if (cfg.include_sup_embedding) options.sup_embedding = &sup_rep;
    rows = BuildFeatures(unsup_table, sup_scores, labels, options);
  });

  std::unordered_map<std::string, double> bench;
  const bool has_bench = !bench_path.empty();
  if (has_bench) RunStage("load-bench", [&] { bench = ReadBenchScores(bench_path); });

  EnsembleTraining ensemble;
  const std::vector<std::string> raw_ids(graph.raw_ids().begin(), graph.raw_ids().end());
  timed("train-mart", [&] {
    ensemble = TrainEnsemble(rows, raw_ids, cfg.mart, has_bench ? &bench : nullptr,
                             cfg.blend_step, cfg.blend_folds);
    ensemble.model.include_sup_embedding = cfg.include_sup_embedding;
    ensemble.model.Save(out / "model.bin");
  });
  report.blend_weight = ensemble.model.blend_weight;

  timed("evaluate", [&] {
    const auto scores = PredictEnsemble(ensemble.model, rows, raw_ids,
                                        has_bench ? &bench : nullptr);
    WriteScoresCsv(out / "predictions.csv", scores);
    EvaluationOptions options;
    options.per_period = cfg.per_period;
    report.evaluation = Evaluate(scores, raw_labels, groups, options);
    WriteText(out / "report.csv", report.evaluation.ToCsv());
    WriteText(out / "report.txt", report.evaluation.ToText());

    report.lift = DefaultRateLift(graph, labels, 5);
    WriteText(out / "lift.csv", report.lift.ToCsv());
    if (!groups.empty()) {
      std::unordered_map<NodeId, std::string> by_node;
      for (const auto& [raw, group] : groups) {
        if (graph.HasRawId(raw)) by_node.emplace(graph.DenseId(raw), group);
      }
      report.group_stats = GroupNeighborStats(graph, by_node);
      std::string csv = "group,nodes,mean_degree\n";
      for (const auto& s : report.group_stats) {
        csv += s.group + "," + std::to_string(s.nodes) + "," + std::to_string(s.mean_degree) + "\n";
      }
      WriteText(out / "group_stats.csv", csv);
    }
  });
  return report;
}

}  // namespace netdp
