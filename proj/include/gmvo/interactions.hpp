#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "gmvo/catalog.hpp"

namespace gmvo {

/// Aggregated interaction counts for one unordered item pair. Direction
/// matters only for view-then-bought: `view_bought_uv` counts "u viewed,
/// v then bought".
struct PairCounts {
  std::uint64_t co_view = 0;
  std::uint64_t view_bought_uv = 0;
  std::uint64_t view_bought_vu = 0;
  std::uint64_t co_purchase = 0;
};

/// Sparse per-pair interaction counts. Pairs are stored under the canonical
/// key (min id, max id); absent pairs behave as all-zero counts.
class InteractionStats {
 public:
  /// Records counts for {u, v} as seen from orientation (u, v).
  /// Throws on self pairs and on duplicate pairs.
  void set(const ItemId& u, const ItemId& v, PairCounts counts);

  /// Counts oriented as (u, v); all-zero when the pair is absent.
  PairCounts get(const ItemId& u, const ItemId& v) const;

  std::size_t pair_count() const { return pairs_.size(); }

  const std::map<std::pair<ItemId, ItemId>, PairCounts>& pairs() const {
    return pairs_;
  }

 private:
  std::map<std::pair<ItemId, ItemId>, PairCounts> pairs_;
};

/// Similarity signal Sc = co_view + view_bought(u,v) + view_bought(v,u)
/// − co_purchase. Co-purchase is subtracted to suppress complementary
/// pairs, so the result may be negative. Absent pairs score 0.
std::int64_t similarity_signal(const InteractionStats& stats, const ItemId& u,
                               const ItemId& v);

}  // namespace gmvo
