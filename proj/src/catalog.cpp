#include "gmvo/catalog.hpp"

#include <cmath>
#include <limits>

#include "gmvo/errors.hpp"
#include "gmvo/rng.hpp"

namespace gmvo {

ItemCatalog::ItemCatalog(std::vector<CatalogItem> items) : items_(std::move(items)) {
  index_.reserve(items_.size());
  std::size_t dim = 0;
  bool dim_seen = false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const CatalogItem& item = items_[i];
    if (item.id.empty()) {
      throw ValidationError("catalog: empty item id at row " + std::to_string(i));
    }
    if (!index_.emplace(item.id, static_cast<NodeIndex>(i)).second) {
      throw ValidationError("catalog: duplicate item id '" + item.id + "'");
    }
    if (!std::isnan(item.raw_price) && item.raw_price < 0.0) {
      throw ValidationError("catalog: negative price for item '" + item.id + "'");
    }
    if (!item.embedding.empty()) {
      if (dim_seen && item.embedding.size() != dim) {
        throw ValidationError("catalog: embedding dimension mismatch for item '" +
                              item.id + "'");
      }
      dim = item.embedding.size();
      dim_seen = true;
    }
  }
}

std::size_t ItemCatalog::dim() const {
  return items_.empty() ? 0 : items_.front().embedding.size();
}

NodeIndex ItemCatalog::index_of(const ItemId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ValidationError("unknown item id '" + id + "'");
  }
  return it->second;
}

void ItemCatalog::attach_embeddings(const Matrix& features) {
  if (features.rows() != items_.size()) {
    throw ValidationError("row count mismatch: " + std::to_string(features.rows()) +
                          " embedding rows vs " + std::to_string(items_.size()) +
                          " catalog items");
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto row = features.row(i);
    items_[i].embedding.assign(row.begin(), row.end());
  }
}

Matrix ItemCatalog::initial_embeddings() const {
  if (items_.empty() || dim() == 0) {
    throw ValidationError("catalog has no embeddings attached");
  }
  Matrix x(items_.size(), dim());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].embedding.size() != dim()) {
      throw ValidationError("catalog: embedding dimension mismatch for item '" +
                            items_[i].id + "'");
    }
    auto row = x.row(i);
    for (std::size_t j = 0; j < dim(); ++j) row[j] = items_[i].embedding[j];
  }
  return x;
}

std::vector<double> ItemCatalog::normalized_prices() const {
  std::vector<double> prices(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) prices[i] = items_[i].normalized_price;
  return prices;
}

std::vector<double> ItemCatalog::raw_prices() const {
  std::vector<double> prices(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) prices[i] = items_[i].raw_price;
  return prices;
}

ItemCatalog normalize_prices(ItemCatalog catalog) {
  if (catalog.empty()) {
    throw ValidationError("empty catalog");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const CatalogItem& item : catalog.items()) {
    if (std::isnan(item.raw_price)) {
      throw ValidationError("catalog: missing price for item '" + item.id +
                            "' (impute before normalizing)");
    }
    lo = std::min(lo, item.raw_price);
    hi = std::max(hi, item.raw_price);
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const double raw = catalog.item(i).raw_price;
    catalog.set_normalized_price(i, range > 0.0 ? (raw - lo) / range : 0.0);
  }
  return catalog;
}

ItemCatalog impute_missing_prices(ItemCatalog catalog) {
  // Fixed stream: imputation is part of loading, not of any experiment seed.
  constexpr std::uint64_t kImputeSeed = 0x1a2b3c4d5e6f7081ull;

  double sum = 0.0, sum_sq = 0.0;
  std::size_t observed = 0;
  for (const CatalogItem& item : catalog.items()) {
    if (!std::isnan(item.raw_price)) {
      sum += item.raw_price;
      sum_sq += item.raw_price * item.raw_price;
      ++observed;
    }
  }
  if (observed == catalog.size()) return catalog;
  if (observed == 0) {
    throw ValidationError("catalog: no observed prices to fit imputation");
  }
  const double mean = sum / static_cast<double>(observed);
  const double variance =
      std::max(0.0, sum_sq / static_cast<double>(observed) - mean * mean);
  const double stddev = std::sqrt(variance);

  Rng rng(kImputeSeed);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!std::isnan(catalog.item(i).raw_price)) continue;
    double price = mean;
    if (stddev > 0.0) {
      do {
        price = mean + stddev * rng.normal();
      } while (price < 0.0);  // truncated at 0
    }
    catalog.set_raw_price(i, price);
  }
  return catalog;
}

}  // namespace gmvo
