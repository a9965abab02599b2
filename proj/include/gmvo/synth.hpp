#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gmvo/manifest.hpp"

namespace gmvo {

/// Planted-structure benchmark generator. Items form clusters with shared
/// embedding centroids; within-cluster pairs get strong co-view signals and
/// consecutive cluster pairs (0,1), (2,3), ... are planted as complementary:
/// their co-purchase count always exceeds the positive signals, so the edge
/// rule can never connect them. Transactions use a flat purchase propensity,
/// making relevance price-independent, and every within-cluster candidate is
/// labeled relevant.
struct SyntheticSpec {
  int cluster_count = 2;
  int items_per_cluster = 20;
  std::size_t embedding_dim = 32;
  /// Norm of each cluster centroid; scales initial decoder outputs and with
  /// them the early training dynamics at the default learning rate. The
  /// default keeps the first optimizer steps inside the sigmoid's active
  /// range so full-batch training at learning rate 0.1 stays stable.
  double embedding_scale = 0.03;
  double noise_scale = 0.05;

  /// Uniform price range per cluster, cycled when clusters outnumber bands.
  struct PriceBand {
    double low = 10.0;
    double high = 100.0;
  };
  std::vector<PriceBand> price_bands{{10.0, 100.0}};

  double mean_co_view_within = 6.0;
  double mean_view_bought_within = 1.0;
  double mean_cross_co_view = 1.0;
  /// Complementary-pair co-purchase exceeds the positive counts by
  /// 1 + Poisson(this mean).
  double mean_co_purchase_margin = 3.0;

  int transaction_buckets = 4;
  double transaction_mean = 5.0;

  std::uint64_t seed = 2024;

  void validate() const;
};

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
void write_synthetic_spec(const std::filesystem::path& path,
                          const SyntheticSpec& spec);

struct SynthOutput {
  std::filesystem::path catalog;
  std::filesystem::path embeddings;
  std::filesystem::path interactions;
  std::filesystem::path candidates;
  std::filesystem::path transactions;
  std::filesystem::path labels;
  std::filesystem::path manifest;
};

/// Writes the full benchmark file set plus a ready-to-run manifest into
/// `out_dir`. Byte-identical for identical specs.
SynthOutput gen_synth(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace gmvo
