#include "gmvo/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "gmvo/errors.hpp"
#include "gmvo/io.hpp"
#include "gmvo/version.hpp"

namespace gmvo {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

void require_exists(const std::filesystem::path& p, const char* role) {
  if (!std::filesystem::exists(p)) {
    throw ValidationError(std::string("manifest: ") + role + " file '" + p.string() +
                          "' does not exist");
  }
}

}  // namespace

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open manifest '" + path.string() + "'");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest '" + path.string() + "': " + e.what());
  }

  try {
    RunManifest m;
    m.version = doc.at("version").get<std::string>();
    if (m.version != kManifestFormatVersion) {
      throw ValidationError("manifest version '" + m.version +
                            "' not supported (expected '" +
                            std::string(kManifestFormatVersion) + "')");
    }
    const auto base = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
    const auto& paths = doc.at("paths");
    m.catalog_path = resolve(base, paths.at("catalog").get<std::string>());
    m.embeddings_path = resolve(base, paths.at("embeddings").get<std::string>());
    m.interactions_path = resolve(base, paths.at("interactions").get<std::string>());
    m.candidates_path = resolve(base, paths.at("candidates").get<std::string>());
    m.transactions_path = resolve(base, paths.at("transactions").get<std::string>());
    m.labels_path = resolve(base, paths.at("labels").get<std::string>());

    const auto& train = doc.at("train");
    m.train.model_kind = model_kind_from_string(train.at("model").get<std::string>());
    m.train.hops = train.at("hops").get<int>();
    m.train.output_dim = train.at("output_dim").get<std::size_t>();
    m.train.learning_rate = train.at("learning_rate").get<double>();
    m.train.epochs = train.at("epochs").get<int>();
    m.train.loss_kind = loss_kind_from_string(train.at("loss").get<std::string>());
    m.train.margin_delta = train.at("margin_delta").get<double>();
    m.train.seed = train.at("seed").get<std::uint64_t>();
    m.train.train_fraction = train.at("train_fraction").get<double>();
    m.train.validate();

    m.theta = doc.at("theta").get<double>();
    m.lambdas = doc.at("lambdas").get<std::vector<double>>();
    if (m.lambdas.empty()) {
      throw ValidationError("manifest: lambda list is empty");
    }
    m.metric_k = doc.at("metric_k").get<std::size_t>();
    if (m.metric_k < 1) {
      throw ValidationError("manifest: metric_k must be at least 1");
    }
    m.output_dir = resolve(base, doc.at("output_dir").get<std::string>());

    require_exists(m.catalog_path, "catalog");
    require_exists(m.embeddings_path, "embeddings");
    require_exists(m.interactions_path, "interactions");
    require_exists(m.candidates_path, "candidates");
    require_exists(m.transactions_path, "transactions");
    require_exists(m.labels_path, "labels");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest '" + path.string() + "': " + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  nlohmann::json doc;
  doc["version"] = manifest.version.empty() ? kManifestFormatVersion
                                            : manifest.version;
  doc["paths"]["catalog"] = manifest.catalog_path.string();
  doc["paths"]["embeddings"] = manifest.embeddings_path.string();
  doc["paths"]["interactions"] = manifest.interactions_path.string();
  doc["paths"]["candidates"] = manifest.candidates_path.string();
  doc["paths"]["transactions"] = manifest.transactions_path.string();
  doc["paths"]["labels"] = manifest.labels_path.string();
  doc["train"]["model"] = to_string(manifest.train.model_kind);
  doc["train"]["hops"] = manifest.train.hops;
  doc["train"]["output_dim"] = manifest.train.output_dim;
  doc["train"]["learning_rate"] = manifest.train.learning_rate;
  doc["train"]["epochs"] = manifest.train.epochs;
  doc["train"]["loss"] = to_string(manifest.train.loss_kind);
  doc["train"]["margin_delta"] = manifest.train.margin_delta;
  doc["train"]["seed"] = manifest.train.seed;
  doc["train"]["train_fraction"] = manifest.train.train_fraction;
  doc["theta"] = manifest.theta;
  doc["lambdas"] = manifest.lambdas;
  doc["metric_k"] = manifest.metric_k;
  doc["output_dir"] = manifest.output_dir.string();

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("failed writing manifest '" + path.string() + "'");
  }
}

IngestResult ingest(const RunManifest& manifest) {
  IngestResult result;
  result.catalog = load_catalog_prepared(manifest.catalog_path);
  result.catalog.attach_embeddings(load_embedding_matrix(manifest.embeddings_path));
  result.interactions = load_interactions(manifest.interactions_path, &result.catalog);
  result.candidate_sets = load_candidate_sets(manifest.candidates_path);
  result.transactions = load_transactions(manifest.transactions_path);
  result.labels = load_labels(manifest.labels_path);

  auto check_id = [&](const ItemId& id, const char* where) {
    if (!result.catalog.contains(id)) {
      throw ValidationError(std::string(where) + ": unknown item id '" + id + "'");
    }
  };
  for (const CandidateSet& set : result.candidate_sets) {
    check_id(set.anchor, "candidates");
    for (const ItemId& id : set.candidates) check_id(id, "candidates");
  }
  for (const auto& [key, count] : result.transactions.rows()) {
    check_id(key.first, "transactions");
    (void)count;
  }
  for (const auto& [key, rel] : result.labels.entries()) {
    check_id(key.first, "labels");
    check_id(key.second, "labels");
    (void)rel;
  }
  return result;
}

}  // namespace gmvo
