#include "gmvo/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "gmvo/checkpoint.hpp"
#include "gmvo/errors.hpp"
#include "gmvo/io.hpp"
#include "gmvo/manifest.hpp"
#include "gmvo/rank_eval.hpp"
#include "gmvo/synth.hpp"
#include "gmvo/version.hpp"

namespace gmvo::cli {

namespace {

struct BuildGraphArgs {
  std::string interactions, catalog, out, embeddings;
  double theta = 0.0;
  bool attach_cold = false;
};

void run_build_graph(const BuildGraphArgs& args) {
  const ItemCatalog catalog = load_catalog(args.catalog);
  const InteractionStats stats = load_interactions(args.interactions, &catalog);
  ItemGraph graph = build_edges(stats, catalog, args.theta);

  if (args.attach_cold) {
    if (args.embeddings.empty()) {
      throw ValidationError("--attach-cold requires --embeddings");
    }
    ItemCatalog with_features = catalog;
    with_features.attach_embeddings(load_embedding_matrix(args.embeddings));
    std::vector<ItemId> cold;
    for (NodeIndex u = 0; u < graph.node_count(); ++u) {
      if (graph.degree(u) == 0) cold.push_back(with_features.item(u).id);
    }
    if (!cold.empty() && cold.size() < with_features.size()) {
      graph = attach_cold_items(graph, with_features, cold);
      std::cout << "attached " << cold.size() << " cold items\n";
    }
  }

  write_edge_list(args.out, edge_list_from_graph(graph, stats, catalog));
  std::cout << "wrote " << graph.edge_count() << " edges over "
            << graph.node_count() << " items to " << args.out << "\n";
}

struct TrainArgs {
  std::string graph, catalog, embeddings, out;
  TrainConfig config;
};

void run_train(const TrainArgs& args) {
  args.config.validate();
  ItemCatalog catalog = load_catalog_prepared(args.catalog);
  catalog.attach_embeddings(load_embedding_matrix(args.embeddings));
  const ItemGraph graph = graph_from_edge_list(load_edge_list(args.graph), catalog);

  const TrainResult result = train(graph, catalog, args.config);
  save_checkpoint(result.params, args.config, args.out);
  write_run_log(args.out + ".runlog", result.history);

  if (result.diverged) {
    throw std::runtime_error(
        "training diverged at epoch " + std::to_string(result.divergence_epoch) +
        "; checkpoint holds the last finite-loss parameters");
  }
  if (!result.history.empty()) {
    std::cout << "trained " << to_string(args.config.model_kind) << " for "
              << result.history.size() << " epochs, final loss "
              << format_double(result.history.back().loss) << "\n";
  }
}

struct InferArgs {
  std::string checkpoint, graph, catalog, embeddings, out;
};

void run_infer(const InferArgs& args) {
  const Checkpoint checkpoint = load_checkpoint(args.checkpoint);
  ItemCatalog catalog = load_catalog_prepared(args.catalog);
  catalog.attach_embeddings(load_embedding_matrix(args.embeddings));
  const ItemGraph graph = graph_from_edge_list(load_edge_list(args.graph), catalog);

  const Matrix z = encode(graph, catalog.initial_embeddings(), checkpoint.params);
  write_embedding_matrix(args.out, z);
  std::cout << "wrote " << z.rows() << "x" << z.cols() << " embeddings to "
            << args.out << "\n";
}

struct RankArgs {
  std::string z, catalog, candidates, out;
  double lambda = 0.0;
  std::size_t k = 8;
};

void run_rank(const RankArgs& args) {
  const ItemCatalog catalog = load_catalog_prepared(args.catalog);
  const Matrix z = load_embedding_matrix(args.z);
  if (z.rows() != catalog.size()) {
    throw ValidationError("row count mismatch: " + std::to_string(z.rows()) +
                          " embedding rows vs " + std::to_string(catalog.size()) +
                          " catalog items");
  }
  const auto sets = load_candidate_sets(args.candidates);
  const Lambda lambda(args.lambda);

  std::vector<RankingRow> rows;
  for (const CandidateSet& set : sets) {
    const auto ranked = rank_candidates(set, catalog, z, lambda, args.k);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      rows.push_back({set.anchor, ranked[i].id, static_cast<int>(i) + 1,
                      ranked[i].score});
    }
  }
  write_rankings(args.out, rows);
  std::cout << "wrote " << rows.size() << " ranking rows to " << args.out << "\n";
}

struct EvalArgs {
  std::string rankings, labels, transactions, catalog, candidates;
  std::size_t k = 8;
};

void run_eval(const EvalArgs& args) {
  const ItemCatalog catalog = load_catalog_prepared(args.catalog);
  const auto ranking_rows = load_rankings(args.rankings);
  const RelevanceLabels labels = load_labels(args.labels);
  const TransactionTable transactions = load_transactions(args.transactions);
  const auto sets = load_candidate_sets(args.candidates);

  std::map<ItemId, const CandidateSet*> set_of;
  for (const CandidateSet& set : sets) set_of[set.anchor] = &set;

  // Regroup rows into per-anchor ranked lists.
  std::map<ItemId, std::vector<std::pair<int, ItemId>>> grouped;
  for (const RankingRow& row : ranking_rows) {
    grouped[row.anchor].emplace_back(row.rank, row.candidate);
  }
  if (grouped.empty()) {
    throw ValidationError("rankings file has no rows");
  }

  double ndcg_sum = 0.0, egmv_sum = 0.0;
  for (auto& [anchor, entries] : grouped) {
    auto it = set_of.find(anchor);
    if (it == set_of.end()) {
      throw ValidationError("no candidate set for ranked anchor '" + anchor + "'");
    }
    std::sort(entries.begin(), entries.end());
    std::vector<ItemId> ranking;
    ranking.reserve(entries.size());
    for (const auto& [rank, id] : entries) ranking.push_back(id);
    ndcg_sum += ndcg_at_k(ranking, anchor, labels, args.k);
    egmv_sum += egmv_at_k(ranking, *it->second, transactions, catalog, args.k);
  }
  const double n = static_cast<double>(grouped.size());
  char line[128];
  std::snprintf(line, sizeof line, "NDCG@%zu = %.6f\nEGMV@%zu = %.6f\n", args.k,
                ndcg_sum / n, args.k, egmv_sum / n);
  std::cout << line;
}

void run_sweep(const std::string& manifest_path) {
  const RunManifest manifest = load_manifest(manifest_path);
  const IngestResult data = ingest(manifest);
  const ItemGraph graph = build_edges(data.interactions, data.catalog, manifest.theta);

  const auto rows =
      lambda_sweep(graph, data.catalog, data.candidate_sets, data.transactions,
                   data.labels, manifest.train, manifest.lambdas, manifest.metric_k);

  std::filesystem::create_directories(manifest.output_dir);
  const auto table_path = manifest.output_dir / "sweep.csv";
  write_sweep_table(table_path, rows);
  std::cout << render_sweep_table(rows, manifest.metric_k);
  std::cout << "wrote " << table_path.string() << "\n";
}

void run_gen_synth(const std::string& spec_path, const std::string& out_dir) {
  const SyntheticSpec spec =
      spec_path.empty() ? SyntheticSpec{} : load_synthetic_spec(spec_path);
  const SynthOutput paths = gen_synth(spec, out_dir);
  std::cout << "wrote synthetic benchmark to " << out_dir << " ("
            << spec.cluster_count * spec.items_per_cluster << " items)\n"
            << "manifest: " << paths.manifest.string() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Item-graph GNN trainer and GMV-aware ranking harness"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  BuildGraphArgs build_args;
  auto* build = app.add_subcommand(
      "build-graph", "Construct the item similarity graph from interactions");
  build->add_option("--interactions", build_args.interactions, "interactions file")
      ->required();
  build->add_option("--catalog", build_args.catalog, "catalog file")->required();
  build->add_option("--theta", build_args.theta,
                    "edge threshold on the similarity signal")
      ->capture_default_str();
  build->add_option("--out", build_args.out, "edge-list output file")->required();
  build->add_flag("--attach-cold", build_args.attach_cold,
                  "connect isolated items to their nearest neighbor");
  build->add_option("--embeddings", build_args.embeddings,
                    "embedding matrix (needed for --attach-cold)");

  TrainArgs train_args;
  std::string train_model = "gcn", train_loss = "bce";
  auto* train_cmd =
      app.add_subcommand("train", "Train an encoder on the item graph");
  train_cmd->add_option("--graph", train_args.graph, "edge-list file")->required();
  train_cmd->add_option("--catalog", train_args.catalog, "catalog file")->required();
  train_cmd->add_option("--embeddings", train_args.embeddings,
                        "initial embedding matrix")
      ->required();
  train_cmd->add_option("--model", train_model, "gcn or gat")
      ->check(CLI::IsMember({"gcn", "gat"}))
      ->capture_default_str();
  train_cmd->add_option("--lambda", train_args.config.lambda.value,
                        "price/similarity trade-off")
      ->capture_default_str();
  train_cmd->add_option("--loss", train_loss, "bce or margin")
      ->check(CLI::IsMember({"bce", "margin"}))
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_args.config.epochs, "training epochs")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.config.learning_rate, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_args.config.seed, "random seed")
      ->capture_default_str();
  train_cmd->add_option("--hops", train_args.config.hops, "message passing hops")
      ->capture_default_str();
  train_cmd->add_option("--output-dim", train_args.config.output_dim,
                        "output embedding dimension")
      ->capture_default_str();
  train_cmd->add_option("--delta", train_args.config.margin_delta,
                        "margin for the max-margin loss")
      ->capture_default_str();
  train_cmd->add_option("--train-fraction", train_args.config.train_fraction,
                        "fraction of edges used for training")
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "checkpoint output file")
      ->required();

  InferArgs infer_args;
  auto* infer = app.add_subcommand(
      "infer", "Encode a graph with a trained checkpoint and write embeddings");
  infer->add_option("--checkpoint", infer_args.checkpoint, "checkpoint file")
      ->required();
  infer->add_option("--graph", infer_args.graph, "edge-list file")->required();
  infer->add_option("--catalog", infer_args.catalog, "catalog file")->required();
  infer->add_option("--embeddings", infer_args.embeddings,
                    "initial embedding matrix")
      ->required();
  infer->add_option("--out", infer_args.out, "output embedding matrix")->required();

  RankArgs rank_args;
  auto* rank = app.add_subcommand(
      "rank", "Rank candidate sets by price-weighted cosine similarity");
  rank->add_option("--z", rank_args.z, "encoded embedding matrix")->required();
  rank->add_option("--catalog", rank_args.catalog, "catalog file")->required();
  rank->add_option("--candidates", rank_args.candidates, "candidate-set file")
      ->required();
  rank->add_option("--lambda", rank_args.lambda, "price/similarity trade-off")
      ->capture_default_str();
  rank->add_option("--k", rank_args.k, "ranking depth")->capture_default_str();
  rank->add_option("--out", rank_args.out, "rankings output file")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Report NDCG@K and EGMV@K of rankings");
  eval->add_option("--rankings", eval_args.rankings, "rankings file")->required();
  eval->add_option("--labels", eval_args.labels, "relevance labels file")->required();
  eval->add_option("--transactions", eval_args.transactions, "transactions file")
      ->required();
  eval->add_option("--catalog", eval_args.catalog, "catalog file (prices)")
      ->required();
  eval->add_option("--candidates", eval_args.candidates,
                   "candidate-set file (purchase-share denominators)")
      ->required();
  eval->add_option("--k", eval_args.k, "metric depth")->capture_default_str();

  std::string sweep_manifest;
  auto* sweep = app.add_subcommand(
      "sweep", "Train and evaluate across the manifest's lambda grid");
  sweep->add_option("--manifest", sweep_manifest, "run manifest")->required();

  std::string synth_spec, synth_out;
  auto* synth = app.add_subcommand("gen-synth",
                                   "Generate the synthetic clustered benchmark");
  synth->add_option("--spec", synth_spec, "spec JSON (defaults when omitted)");
  synth->add_option("--out", synth_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      run_build_graph(build_args);
    } else if (train_cmd->parsed()) {
      train_args.config.model_kind = model_kind_from_string(train_model);
      train_args.config.loss_kind = loss_kind_from_string(train_loss);
      train_args.config.lambda = Lambda(train_args.config.lambda.value);
      run_train(train_args);
    } else if (infer->parsed()) {
      run_infer(infer_args);
    } else if (rank->parsed()) {
      run_rank(rank_args);
    } else if (eval->parsed()) {
      run_eval(eval_args);
    } else if (sweep->parsed()) {
      run_sweep(sweep_manifest);
    } else if (synth->parsed()) {
      run_gen_synth(synth_spec, synth_out);
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace gmvo::cli
