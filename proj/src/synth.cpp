#include "gmvo/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "gmvo/errors.hpp"
#include "gmvo/io.hpp"
#include "gmvo/rng.hpp"
#include "gmvo/version.hpp"

namespace gmvo {

namespace {

std::string item_name(int cluster, int index) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "c%02d_i%03d", cluster, index);
  return buffer;
}

// Orthonormal cluster centroids from random Gaussians (Gram-Schmidt).
std::vector<std::vector<double>> make_centroids(int clusters, std::size_t dim,
                                                Rng& rng) {
  std::vector<std::vector<double>> centroids(clusters, std::vector<double>(dim));
  for (auto& c : centroids) {
    for (double& v : c) v = rng.normal();
  }
  for (int i = 0; i < clusters; ++i) {
    for (int j = 0; j < i; ++j) {
      const double proj = dot(centroids[i], centroids[j]);
      for (std::size_t k = 0; k < dim; ++k) centroids[i][k] -= proj * centroids[j][k];
    }
    const double norm = std::sqrt(dot(centroids[i], centroids[i]));
    if (norm < 1e-9) {
      throw std::runtime_error("degenerate centroid draw");
    }
    for (double& v : centroids[i]) v /= norm;
  }
  return centroids;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (cluster_count < 1) throw ValidationError("cluster_count must be at least 1");
  if (items_per_cluster < 1) {
    throw ValidationError("items_per_cluster must be at least 1");
  }
  if (embedding_dim < static_cast<std::size_t>(cluster_count)) {
    throw ValidationError("embedding_dim must be at least cluster_count");
  }
  if (!(embedding_scale > 0.0)) {
    throw ValidationError("embedding_scale must be positive");
  }
  if (noise_scale < 0.0) throw ValidationError("noise_scale must be nonnegative");
  if (price_bands.empty()) throw ValidationError("price_bands must not be empty");
  for (const PriceBand& band : price_bands) {
    if (!(band.low >= 0.0 && band.high >= band.low)) {
      throw ValidationError("price band must satisfy 0 <= low <= high");
    }
  }
  if (mean_co_view_within < 0.0 || mean_view_bought_within < 0.0 ||
      mean_cross_co_view < 0.0 || mean_co_purchase_margin < 0.0) {
    throw ValidationError("interaction means must be nonnegative");
  }
  if (transaction_buckets < 1) {
    throw ValidationError("transaction_buckets must be at least 1");
  }
  if (transaction_mean < 0.0) {
    throw ValidationError("transaction_mean must be nonnegative");
  }
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open synthetic spec '" + path.string() + "'");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("synthetic spec '" + path.string() + "': " + e.what());
  }
  try {
    SyntheticSpec spec;
    const auto version = doc.at("version").get<std::string>();
    if (version != kSyntheticSpecFormatVersion) {
      throw ValidationError("synthetic spec version '" + version + "' not supported");
    }
    spec.cluster_count = doc.at("cluster_count").get<int>();
    spec.items_per_cluster = doc.at("items_per_cluster").get<int>();
    spec.embedding_dim = doc.at("embedding_dim").get<std::size_t>();
    spec.embedding_scale = doc.at("embedding_scale").get<double>();
    spec.noise_scale = doc.at("noise_scale").get<double>();
    spec.price_bands.clear();
    for (const auto& band : doc.at("price_bands")) {
      spec.price_bands.push_back({band.at(0).get<double>(), band.at(1).get<double>()});
    }
    spec.mean_co_view_within = doc.at("mean_co_view_within").get<double>();
    spec.mean_view_bought_within = doc.at("mean_view_bought_within").get<double>();
    spec.mean_cross_co_view = doc.at("mean_cross_co_view").get<double>();
    spec.mean_co_purchase_margin = doc.at("mean_co_purchase_margin").get<double>();
    spec.transaction_buckets = doc.at("transaction_buckets").get<int>();
    spec.transaction_mean = doc.at("transaction_mean").get<double>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("synthetic spec '" + path.string() + "': " + e.what());
  }
}

void write_synthetic_spec(const std::filesystem::path& path,
                          const SyntheticSpec& spec) {
  nlohmann::json doc;
  doc["version"] = kSyntheticSpecFormatVersion;
  doc["cluster_count"] = spec.cluster_count;
  doc["items_per_cluster"] = spec.items_per_cluster;
  doc["embedding_dim"] = spec.embedding_dim;
  doc["embedding_scale"] = spec.embedding_scale;
  doc["noise_scale"] = spec.noise_scale;
  auto bands = nlohmann::json::array();
  for (const auto& band : spec.price_bands) {
    bands.push_back({band.low, band.high});
  }
  doc["price_bands"] = bands;
  doc["mean_co_view_within"] = spec.mean_co_view_within;
  doc["mean_view_bought_within"] = spec.mean_view_bought_within;
  doc["mean_cross_co_view"] = spec.mean_cross_co_view;
  doc["mean_co_purchase_margin"] = spec.mean_co_purchase_margin;
  doc["transaction_buckets"] = spec.transaction_buckets;
  doc["transaction_mean"] = spec.transaction_mean;
  doc["seed"] = spec.seed;

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(2) << '\n';
}

SynthOutput gen_synth(const SyntheticSpec& spec,
                      const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw ValidationError("cannot create output directory '" + out_dir.string() +
                          "'");
  }

  Rng rng(spec.seed);
  const int total = spec.cluster_count * spec.items_per_cluster;
  const auto cluster_of = [&](int item) { return item / spec.items_per_cluster; };

  const auto centroids = make_centroids(spec.cluster_count, spec.embedding_dim, rng);

  // Catalog and embeddings.
  std::vector<CatalogItem> items(total);
  Matrix features(total, spec.embedding_dim);
  for (int i = 0; i < total; ++i) {
    const int c = cluster_of(i);
    items[i].id = item_name(c, i % spec.items_per_cluster);
    const auto& band = spec.price_bands[c % spec.price_bands.size()];
    items[i].raw_price = std::round(rng.uniform(band.low, band.high) * 100.0) / 100.0;
    auto row = features.row(i);
    for (std::size_t k = 0; k < spec.embedding_dim; ++k) {
      row[k] = spec.embedding_scale *
               (centroids[c][k] + spec.noise_scale * rng.normal());
    }
  }
  ItemCatalog catalog{std::move(items)};
  catalog.attach_embeddings(features);

  // Interactions: strong positive signal within clusters, planted
  // complementary signal between consecutive cluster pairs.
  InteractionStats stats;
  for (int i = 0; i < total; ++i) {
    for (int j = i + 1; j < total; ++j) {
      const int ci = cluster_of(i);
      const int cj = cluster_of(j);
      PairCounts counts;
      if (ci == cj) {
        counts.co_view = rng.poisson(spec.mean_co_view_within);
        counts.view_bought_uv = rng.poisson(spec.mean_view_bought_within);
        counts.view_bought_vu = rng.poisson(spec.mean_view_bought_within);
        counts.co_purchase = 0;
      } else if (ci / 2 == cj / 2) {  // complementary pair of clusters
        counts.co_view = rng.poisson(spec.mean_cross_co_view);
        counts.view_bought_uv = 0;
        counts.view_bought_vu = 0;
        counts.co_purchase = counts.co_view + 1 + rng.poisson(spec.mean_co_purchase_margin);
      } else {
        continue;  // unrelated clusters: no interaction rows at all
      }
      stats.set(catalog.item(i).id, catalog.item(j).id, counts);
    }
  }

  // Flat-propensity transactions: purchase counts independent of price.
  TransactionTable transactions;
  for (int i = 0; i < total; ++i) {
    for (int t = 0; t < spec.transaction_buckets; ++t) {
      const std::uint64_t count = rng.poisson(spec.transaction_mean);
      if (count > 0) {
        transactions.add(catalog.item(i).id, static_cast<std::uint32_t>(t), count);
      }
    }
  }

  // Candidates: all same-cluster items; every candidate equally relevant.
  std::vector<CandidateSet> candidate_sets;
  RelevanceLabels labels;
  for (int a = 0; a < total; ++a) {
    CandidateSet set;
    set.anchor = catalog.item(a).id;
    const int c = cluster_of(a);
    for (int j = c * spec.items_per_cluster; j < (c + 1) * spec.items_per_cluster;
         ++j) {
      if (j == a) continue;
      set.candidates.push_back(catalog.item(j).id);
      labels.set(set.anchor, catalog.item(j).id, 1);
    }
    if (!set.candidates.empty()) candidate_sets.push_back(std::move(set));
  }

  SynthOutput paths;
  paths.catalog = out_dir / "catalog.csv";
  paths.embeddings = out_dir / "embeddings.bin";
  paths.interactions = out_dir / "interactions.csv";
  paths.candidates = out_dir / "candidates.csv";
  paths.transactions = out_dir / "transactions.csv";
  paths.labels = out_dir / "labels.csv";
  paths.manifest = out_dir / "manifest.json";

  write_catalog(paths.catalog, catalog);
  write_embedding_matrix(paths.embeddings, features);
  write_interactions(paths.interactions, stats);
  write_candidate_sets(paths.candidates, candidate_sets);
  write_transactions(paths.transactions, transactions);
  write_labels(paths.labels, labels);

  RunManifest manifest;
  manifest.version = kManifestFormatVersion;
  manifest.catalog_path = "catalog.csv";
  manifest.embeddings_path = "embeddings.bin";
  manifest.interactions_path = "interactions.csv";
  manifest.candidates_path = "candidates.csv";
  manifest.transactions_path = "transactions.csv";
  manifest.labels_path = "labels.csv";
  manifest.train.seed = spec.seed;
  manifest.theta = 0.0;
  manifest.lambdas = {0.0, 0.05, 0.1, 0.5, 1.0, 2.0};
  manifest.metric_k = 4;
  manifest.output_dir = ".";
  write_manifest(paths.manifest, manifest);

  return paths;
}

}  // namespace gmvo
