#include "gmvo/interactions.hpp"

#include "gmvo/errors.hpp"

namespace gmvo {

void InteractionStats::set(const ItemId& u, const ItemId& v, PairCounts counts) {
  if (u == v) {
    throw ValidationError("self pair '" + u + "'");
  }
  std::pair<ItemId, ItemId> key(u, v);
  if (key.first > key.second) {
    std::swap(key.first, key.second);
    std::swap(counts.view_bought_uv, counts.view_bought_vu);
  }
  if (!pairs_.emplace(std::move(key), counts).second) {
    throw ValidationError("duplicate interaction pair {" + u + ", " + v + "}");
  }
}

PairCounts InteractionStats::get(const ItemId& u, const ItemId& v) const {
  if (u == v) {
    throw ValidationError("self pair '" + u + "'");
  }
  const bool swapped = u > v;
  auto it = pairs_.find(swapped ? std::make_pair(v, u) : std::make_pair(u, v));
  if (it == pairs_.end()) return {};
  PairCounts counts = it->second;
  if (swapped) std::swap(counts.view_bought_uv, counts.view_bought_vu);
  return counts;
}

std::int64_t similarity_signal(const InteractionStats& stats, const ItemId& u,
                               const ItemId& v) {
  const PairCounts counts = stats.get(u, v);
  return static_cast<std::int64_t>(counts.co_view) +
         static_cast<std::int64_t>(counts.view_bought_uv) +
         static_cast<std::int64_t>(counts.view_bought_vu) -
         static_cast<std::int64_t>(counts.co_purchase);
}

}  // namespace gmvo
