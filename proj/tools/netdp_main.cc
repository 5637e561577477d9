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


// netdp: command-line entry point. One subcommand per pipeline stage plus
// `run`, which chains them from a key=value config file.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "netdp/pipeline.h"

namespace fs = std::filesystem;

namespace {

using namespace netdp;

void SetupLogging(const std::string& level) {
  auto logger = spdlog::stderr_logger_mt("netdp");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
  logger->set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(logger);
}

// CLI11 writes a flag that was not given as false whatever its bound value,
// so boolean lines are rewritten from the resolved config. Unset values are
// left out.
std::string RunManifest(const CLI::App& rn, const RunConfig& run, bool no_generate) {
  const std::unordered_map<std::string, bool> flags = {
      {"no-generate", no_generate},
      {"add-reverse-edges", run.ingest.add_reverse_edges},
      {"unsup-linear-decay", run.unsup.linear_decay},
      {"sup-linear-decay", run.sup.linear_decay},
      {"include-sup-emb", run.include_sup_embedding},
      {"no-per-period", !run.per_period},
  };
  std::istringstream lines(rn.config_to_str(true, false));
  std::string out, line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      const auto it = flags.find(line.substr(0, eq));
      if (it != flags.end()) line = it->first + (it->second ? "=true" : "=false");
      // An empty value reads back as one empty element for list options.
      if (line.compare(eq, std::string::npos, "=\"\"") == 0) continue;
    }
    out += "run." + line + "\n";
  }
  return out;
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

void AddIngestOptions(CLI::App* app, IngestOptions& o, const std::string& prefix) {
  app->add_option("--" + prefix + "shards", o.num_shards, "Number of graph shards")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "alpha", o.alpha, "Negative-sampling degree exponent")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--" + prefix + "max-degree", o.max_degree, "Adjacency list cap")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "max-skip-rate", o.max_skip_rate,
                  "Tolerated fraction of malformed lines")->capture_default_str();
  app->add_flag("--" + prefix + "add-reverse-edges", o.add_reverse_edges,
                "Insert dst->src for every edge");
}

void AddUnsupOptions(CLI::App* app, UnsupConfig& c, const std::string& prefix) {
  app->add_option("--" + prefix + "dim", c.dim, "Embedding dimension")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "epochs", c.max_epochs)->capture_default_str();
  app->add_option("--" + prefix + "negatives", c.negatives)->capture_default_str();
  app->add_option("--" + prefix + "neighbors", c.neighbors_per_step)->capture_default_str();
  app->add_option("--" + prefix + "lr", c.learning_rate)->capture_default_str();
  app->add_flag("--" + prefix + "linear-decay", c.linear_decay,
                "Decay the learning rate linearly to zero");
  app->add_option("--" + prefix + "batch", c.batch_size)
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "init-scale", c.init_scale,
                  "Uniform init half-width; 0 selects 0.5/dim")->capture_default_str();
  app->add_option("--" + prefix + "probe-pairs", c.probe_pairs)->capture_default_str();
  app->add_option("--" + prefix + "patience", c.early_stop_patience,
                  "Early-stop patience in epochs; 0 disables")->capture_default_str();
}

void AddSupOptions(CLI::App* app, SupConfig& c, const std::string& prefix) {
  app->add_option("--" + prefix + "k", c.k, "Representation dimension")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "steps", c.steps, "Aggregation steps")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "epochs", c.epochs)->capture_default_str();
  app->add_option("--" + prefix + "lr", c.learning_rate)->capture_default_str();
  app->add_flag("--" + prefix + "linear-decay", c.linear_decay,
                "Decay the learning rate linearly to zero");
  app->add_option("--" + prefix + "dense-lr-scale", c.dense_lr_scale,
                  "Step multiplier for W1 and w2; 0 selects 1/batch")->capture_default_str();
  app->add_option("--" + prefix + "lambda", c.lambda)->capture_default_str();
  app->add_option("--" + prefix + "fanout", c.fanout)
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "batch", c.batch_size)
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "init-scale", c.init_scale)->capture_default_str();
  app->add_option("--" + prefix + "probe-nodes", c.probe_nodes)->capture_default_str();
}

void AddMartOptions(CLI::App* app, MartConfig& c, const std::string& prefix) {
  app->add_option("--" + prefix + "trees", c.num_trees)->capture_default_str();
  app->add_option("--" + prefix + "depth", c.max_depth)
      ->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--" + prefix + "shrinkage", c.shrinkage)
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app->add_option("--" + prefix + "min-leaf", c.min_leaf)
      ->check(CLI::PositiveNumber)->capture_default_str();
}

void AddSynthOptions(CLI::App* app, SynthConfig& c, const std::string& prefix) {
  app->add_option("--" + prefix + "nodes", c.num_nodes)->capture_default_str();
  app->add_option("--" + prefix + "blocks", c.num_blocks)->capture_default_str();
  app->add_option("--" + prefix + "p-in", c.p_in)->capture_default_str();
  app->add_option("--" + prefix + "p-out", c.p_out)->capture_default_str();
  app->add_option("--" + prefix + "boost", c.neighbor_boost,
                  "Odds multiplier per default neighbor")->capture_default_str();
  app->add_option("--" + prefix + "label-fraction", c.label_fraction)->capture_default_str();
  app->add_option("--" + prefix + "individual-risk", c.individual_risk)
      ->capture_default_str();
  app->add_option("--" + prefix + "bench-noise", c.bench_noise)->capture_default_str();
  app->add_option("--" + prefix + "block-rates", c.block_default_rates,
                  "Per-block base default rates");
}

struct CommonFlags {
  std::size_t workers = 1;
  std::uint64_t seed = 7;
};

ScoreColumns ToScoreColumns(const PartitionedGraph& g, const SupResult& r) {
  ScoreColumns cols;
  cols.names = {"y_hat"};
  cols.columns.assign(1, {});
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    cols.ids.push_back(g.RawId(r.nodes[i]));
    cols.columns[0].push_back(r.scores[i]);
  }
  return cols;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netdp: network-based default prediction"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->capture_default_str();

  // gen-synth
  SynthConfig synth;
  fs::path synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic labeled graph");
  AddSynthOptions(gen, synth, "");
  gen->add_option("--seed", synth.seed)->capture_default_str();
  gen->add_option("--out", synth_out, "Output directory")->required();

  // ingest
  IngestOptions ingest;
  fs::path ingest_edges, ingest_out;
  auto* ing = app.add_subcommand("ingest", "Build the sharded adjacency store");
  ing->add_option("--edges", ingest_edges, "Edge list (src<TAB>dst[<TAB>w])")
      ->required()->check(CLI::ExistingFile);
  ing->add_option("--out", ingest_out, "Graph directory")->required();
  AddIngestOptions(ing, ingest, "");
  ing->add_option("--seed", ingest.seed)->capture_default_str();

  // train-unsup
  UnsupConfig unsup;
  fs::path unsup_graph, unsup_out;
  bool unsup_literal_loss = false;
  auto* tu = app.add_subcommand("train-unsup", "Train unsupervised node embeddings");
  tu->add_option("--graph", unsup_graph)->required()->check(CLI::ExistingDirectory);
  tu->add_option("--out", unsup_out, "Embedding file")->required();
  AddUnsupOptions(tu, unsup, "");
  tu->add_option("--workers", unsup.num_workers)
      ->check(CLI::PositiveNumber)->capture_default_str();
  tu->add_option("--seed", unsup.seed)->capture_default_str();
  tu->add_flag("--literal-sign-loss", unsup_literal_loss,
               "Use the negative term with its printed sign (comparison only)");

  // train-sup
  SupConfig sup;
  fs::path sup_graph, sup_labels, sup_out, sup_rep_out, sup_warm;
  std::size_t sup_folds = 0;
  auto* ts = app.add_subcommand("train-sup", "Train the supervised neighbor model");
  ts->add_option("--graph", sup_graph)->required()->check(CLI::ExistingDirectory);
  ts->add_option("--labels", sup_labels)->required()->check(CLI::ExistingFile);
  ts->add_option("--out", sup_out, "Score CSV (raw_node_id,y_hat)")->required();
  ts->add_option("--rep-out", sup_rep_out,
                 "Also write final representations of every node");
  ts->add_option("--warm-start", sup_warm, "Embedding file seeding the base vectors")
      ->check(CLI::ExistingFile);
  AddSupOptions(ts, sup, "");
  ts->add_option("--cross-fit-folds", sup_folds,
                 "Score train nodes with models that never saw their label")
      ->capture_default_str();
  ts->add_option("--workers", sup.num_workers)
      ->check(CLI::PositiveNumber)->capture_default_str();
  ts->add_option("--seed", sup.seed)->capture_default_str();

  // train-ensemble
  MartConfig mart;
  fs::path te_emb, te_sup, te_labels, te_bench, te_out, te_sup_emb;
  double te_step = 0.05;
  std::size_t te_folds = 5;
  auto* te = app.add_subcommand("train-ensemble", "Fit MART and the bench blend");
  te->add_option("--emb", te_emb, "Unsupervised embedding file")
      ->required()->check(CLI::ExistingFile);
  te->add_option("--sup", te_sup, "Supervised score CSV")
      ->required()->check(CLI::ExistingFile);
  te->add_option("--labels", te_labels)->required()->check(CLI::ExistingFile);
  te->add_option("--bench", te_bench, "Bench score CSV")->check(CLI::ExistingFile);
  te->add_option("--sup-emb", te_sup_emb,
                 "Supervised representations to append as features")
      ->check(CLI::ExistingFile);
  te->add_option("--blend-step", te_step)->capture_default_str();
  te->add_option("--blend-folds", te_folds,
                 "Out-of-fold forests for blend selection; 0 or 1 disables")
      ->capture_default_str();
  te->add_option("--out", te_out, "Model file")->required();
  AddMartOptions(te, mart, "");

  // predict
  fs::path pr_model, pr_emb, pr_sup, pr_bench, pr_out, pr_sup_emb;
  auto* pr = app.add_subcommand("predict", "Score nodes with a trained model");
  pr->add_option("--model", pr_model)->required()->check(CLI::ExistingFile);
  pr->add_option("--emb", pr_emb)->required()->check(CLI::ExistingFile);
  pr->add_option("--sup", pr_sup)->required()->check(CLI::ExistingFile);
  pr->add_option("--bench", pr_bench)->check(CLI::ExistingFile);
  pr->add_option("--sup-emb", pr_sup_emb)->check(CLI::ExistingFile);
  pr->add_option("--out", pr_out, "Score CSV")->required();

  // evaluate
  fs::path ev_scores, ev_labels, ev_groups, ev_out;
  bool ev_per_period = false, ev_all_splits = false;
  auto* ev = app.add_subcommand("evaluate", "KS report for score columns");
  ev->add_option("--scores", ev_scores)->required()->check(CLI::ExistingFile);
  ev->add_option("--labels", ev_labels)->required()->check(CLI::ExistingFile);
  ev->add_option("--groups", ev_groups)->check(CLI::ExistingFile);
  ev->add_flag("--per-period", ev_per_period);
  ev->add_flag("--all-splits", ev_all_splits, "Score train records as well as test");
  ev->add_option("--out", ev_out, "CSV report path");

  // lift
  fs::path li_graph, li_labels, li_out;
  std::size_t li_max = 5;
  auto* li = app.add_subcommand("lift", "Default rate by number of default neighbors");
  li->add_option("--graph", li_graph)->required()->check(CLI::ExistingDirectory);
  li->add_option("--labels", li_labels)->required()->check(CLI::ExistingFile);
  li->add_option("--max-bucket", li_max)->capture_default_str();
  li->add_option("--out", li_out, "CSV path; stdout when omitted");

  // run
  RunConfig run;
  CommonFlags common;
  std::string out_dir = run.out_dir.string(), edges, labels, groups, bench;
  bool no_generate = false;
  auto* rn = app.add_subcommand("run", "Full pipeline");
  // Config files are only read by the root app; run falls through to it so
  // `run --config FILE` works. Keys carry the subcommand prefix (run.sup-k).
  app.set_config("--config", "", "key=value config file (run.<option>=...); flags override it");
  rn->fallthrough();
  rn->add_option("--out", out_dir, "Run directory")->capture_default_str();
  rn->add_option("--seed", common.seed, "Seed for every stage")->capture_default_str();
  rn->add_option("--workers", common.workers, "Workers for the trainers")
      ->check(CLI::PositiveNumber)->capture_default_str();
  rn->add_flag("--no-generate", no_generate, "Read inputs instead of generating them");
  rn->add_option("--edges", edges);
  rn->add_option("--labels", labels);
  rn->add_option("--groups", groups);
  rn->add_option("--bench", bench);
  AddSynthOptions(rn, run.synth, "synth-");
  AddIngestOptions(rn, run.ingest, "");
  AddUnsupOptions(rn, run.unsup, "unsup-");
  AddSupOptions(rn, run.sup, "sup-");
  AddMartOptions(rn, run.mart, "mart-");
  rn->add_option("--blend-step", run.blend_step)->capture_default_str();
  rn->add_option("--blend-folds", run.blend_folds)->capture_default_str();
  rn->add_option("--sup-folds", run.sup_folds,
                 "Cross-fitting folds for train-split supervised scores")
      ->capture_default_str();
  rn->add_flag("--include-sup-emb", run.include_sup_embedding,
               "Append supervised representations to the MART features");
  rn->add_flag("!--no-per-period", run.per_period, "Skip per-period KS rows");

  CLI11_PARSE(app, argc, argv);
  SetupLogging(log_level);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunStage(command, [&] {
      if (*gen) {
        const auto data = GenerateSynthetic(synth);
        data.Write(synth_out);
        spdlog::info("gen-synth nodes={} edges={} labels={}", data.num_nodes,
                     data.edges.size(), data.labels.size());
      } else if (*ing) {
        IngestStats stats;
        const auto g = IngestEdgeFile(ingest_edges, ingest, &stats);
        g.Save(ingest_out);
        spdlog::info("ingest nodes={} edges={} malformed={} self_loops={} duplicates={} "
                     "truncated_nodes={}",
                     g.num_nodes(), g.num_edges(), stats.malformed, stats.self_loops,
                     stats.duplicates, stats.truncated_nodes);
      } else if (*tu) {
        if (unsup_literal_loss) unsup.loss_form = NegLossForm::kLiteralSign;
        const auto g = PartitionedGraph::Load(unsup_graph);
        auto store = MakeUnsupStore(g, unsup);
        const auto result = TrainUnsup(g, *store, unsup);
        result.table.Save(unsup_out, g.raw_ids());
      } else if (*ts) {
        const auto g = PartitionedGraph::Load(sup_graph);
        const auto set = ResolveLabels(ReadLabelsCsv(sup_labels), g);
        EmbeddingTable warm;
        if (!sup_warm.empty()) {
          std::vector<std::string> ids;
          const auto loaded = EmbeddingTable::Load(sup_warm, &ids);
          warm = EmbeddingTable(g.num_nodes(), loaded.dim());
          for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!g.HasRawId(ids[i])) continue;
            const auto src = loaded.row(i);
            std::copy(src.begin(), src.end(), warm.row(g.DenseId(ids[i])).begin());
          }
        }
        auto stores = MakeSupStores(g, sup, sup_warm.empty() ? nullptr : &warm);
        auto result = TrainSup(g, set, stores, sup);
        if (sup_folds >= 2) CrossFitSupScores(g, set, sup, sup_folds, result);
        WriteScoresCsv(sup_out, ToScoreColumns(g, result));
        if (!sup_rep_out.empty()) {
          std::vector<NodeId> all(g.num_nodes());
          for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
          RepresentNodes(g, result.params, all).Save(sup_rep_out, g.raw_ids());
        }
      } else if (*te) {
        const auto in = LoadEnsembleInputs(te_emb, te_sup, ReadLabelsCsv(te_labels), te_sup_emb);
        std::unordered_map<std::string, double> bench_scores;
        if (!te_bench.empty()) bench_scores = ReadBenchScores(te_bench);
        auto trained = TrainEnsemble(in.rows, in.raw_ids, mart,
                                     te_bench.empty() ? nullptr : &bench_scores, te_step,
                                     te_folds);
        trained.model.include_sup_embedding = !te_sup_emb.empty();
        trained.model.Save(te_out);
        spdlog::info("train-ensemble rows={} trees={} final_loss={:.6f} blend_weight={:.2f}",
                     in.rows.size(), trained.model.forest.trees().size(),
                     trained.trace.losses.back(), trained.model.blend_weight);
      } else if (*pr) {
        const auto model = EnsembleModel::Load(pr_model);
        if (model.include_sup_embedding && pr_sup_emb.empty()) {
          throw InvalidArgument("model expects --sup-emb");
        }
        const auto in = LoadEnsembleInputs(pr_emb, pr_sup, {}, pr_sup_emb);
        std::unordered_map<std::string, double> bench_scores;
        if (!pr_bench.empty()) bench_scores = ReadBenchScores(pr_bench);
        WriteScoresCsv(pr_out, PredictEnsemble(model, in.rows, in.raw_ids,
                                               pr_bench.empty() ? nullptr : &bench_scores));
      } else if (*ev) {
        EvaluationOptions options;
        options.per_period = ev_per_period;
        if (ev_all_splits) options.split.reset();
        std::unordered_map<std::string, std::string> group_map;
        if (!ev_groups.empty()) group_map = ReadKeyValueCsv(ev_groups);
        const auto report =
            Evaluate(ReadScoresCsv(ev_scores), ReadLabelsCsv(ev_labels), group_map, options);
        std::cout << report.ToText();
        if (!ev_out.empty()) WriteFile(ev_out, report.ToCsv());
      } else if (*li) {
        const auto g = PartitionedGraph::Load(li_graph);
        const auto report = DefaultRateLift(g, ResolveLabels(ReadLabelsCsv(li_labels), g), li_max);
        if (li_out.empty()) {
          std::cout << report.ToCsv();
        } else {
          WriteFile(li_out, report.ToCsv());
        }
      } else if (*rn) {
        run.out_dir = out_dir;
        run.generate = !no_generate;
        run.edges = edges;
        run.labels = labels;
        run.groups = groups;
        run.bench = bench;
        if (!run.generate && (edges.empty() || labels.empty())) {
          throw InvalidArgument("--no-generate needs --edges and --labels");
        }
        run.synth.seed = common.seed;
        run.ingest.seed = common.seed;
        run.unsup.seed = common.seed;
        run.sup.seed = common.seed;
        run.unsup.num_workers = common.workers;
        run.sup.num_workers = common.workers;
        fs::create_directories(run.out_dir);
        WriteFile(run.out_dir / "manifest.conf", RunManifest(*rn, run, no_generate));
        const auto report = RunPipeline(run);
        std::cout << report.evaluation.ToText();
        for (const auto& [stage, secs] : report.stage_seconds) {
          spdlog::info("timing stage={} seconds={:.3f}", stage, secs);
        }
      }
    });
  } catch (const StageError& e) {
    spdlog::error("stage={} {}", e.stage(), e.what());
    std::cerr << "netdp: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
