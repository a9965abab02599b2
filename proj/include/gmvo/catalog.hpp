#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmvo/matrix.hpp"

namespace gmvo {

using ItemId = std::string;
using NodeIndex = std::uint32_t;

struct CatalogItem {
  ItemId id;
  double raw_price = 0.0;  ///< NaN marks a missing price before imputation.
  double normalized_price = 0.0;
  std::vector<double> embedding;  ///< initial node features, may be empty
};

/// Ordered item catalog. Row i of the embedding-matrix file and of every
/// encoder matrix corresponds to item i here.
class ItemCatalog {
 public:
  ItemCatalog() = default;
  explicit ItemCatalog(std::vector<CatalogItem> items);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  /// Embedding dimension; 0 until embeddings are attached.
  std::size_t dim() const;

  const CatalogItem& item(std::size_t i) const { return items_[i]; }
  const std::vector<CatalogItem>& items() const { return items_; }

  bool contains(const ItemId& id) const { return index_.count(id) > 0; }

  /// Index of an item; throws ValidationError naming the id when unknown.
  NodeIndex index_of(const ItemId& id) const;

  /// Replaces all item embeddings with the rows of `features`
  /// (row count must equal catalog size).
  void attach_embeddings(const Matrix& features);

  /// n×d matrix of the attached embeddings.
  Matrix initial_embeddings() const;

  std::vector<double> normalized_prices() const;
  std::vector<double> raw_prices() const;

  void set_raw_price(std::size_t i, double price) { items_[i].raw_price = price; }
  void set_normalized_price(std::size_t i, double price) {
    items_[i].normalized_price = price;
  }

 private:
  std::vector<CatalogItem> items_;
  std::unordered_map<ItemId, NodeIndex> index_;
};

/// Min-max normalization of raw prices into [0, 1]; a degenerate catalog
/// (max == min) normalizes to all zeros. Requires every raw price present
/// and nonnegative.
ItemCatalog normalize_prices(ItemCatalog catalog);

/// Fills missing (NaN) raw prices by sampling a normal distribution fitted
/// to the observed prices, truncated at 0. Uses a fixed internal seed so the
/// result is a pure function of the catalog.
ItemCatalog impute_missing_prices(ItemCatalog catalog);

}  // namespace gmvo
