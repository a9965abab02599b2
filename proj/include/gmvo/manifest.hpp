#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gmvo/catalog.hpp"
#include "gmvo/interactions.hpp"
#include "gmvo/rank_eval.hpp"
#include "gmvo/training.hpp"

namespace gmvo {

/// Everything one experiment run needs: input files, training setup, the
/// edge threshold, the lambda grid and where outputs go. Relative paths are
/// resolved against the manifest file's directory on load.
struct RunManifest {
  std::string version;
  std::filesystem::path catalog_path;
  std::filesystem::path embeddings_path;
  std::filesystem::path interactions_path;
  std::filesystem::path candidates_path;
  std::filesystem::path transactions_path;
  std::filesystem::path labels_path;
  TrainConfig train;
  double theta = 0.0;
  std::vector<double> lambdas;
  std::size_t metric_k = 8;
  std::filesystem::path output_dir;
};

/// Parses and validates a manifest: version must match the supported format
/// version and every referenced file must exist.
RunManifest load_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// All datasets of a run, loaded and cross-validated: prices imputed and
/// normalized, embeddings attached (row counts must match), every item id
/// in every file resolved against the catalog.
struct IngestResult {
  ItemCatalog catalog;
  InteractionStats interactions;
  std::vector<CandidateSet> candidate_sets;
  TransactionTable transactions;
  RelevanceLabels labels;
};

IngestResult ingest(const RunManifest& manifest);

}  // namespace gmvo
