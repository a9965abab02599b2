#include "gmvo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmvo/errors.hpp"
#include "gmvo/rng.hpp"

namespace gmvo {

ItemGraph ItemGraph::from_edges(NodeIndex node_count, std::vector<Edge> edges) {
  for (Edge& e : edges) {
    if (e.first == e.second) {
      throw ValidationError("self-loop on node " + std::to_string(e.first));
    }
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.second >= node_count) {
      throw ValidationError("edge endpoint " + std::to_string(e.second) +
                            " out of range (node count " +
                            std::to_string(node_count) + ")");
    }
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ValidationError("duplicate edge in edge list");
  }

  ItemGraph graph;
  graph.node_count_ = node_count;
  graph.edges_ = std::move(edges);

  std::vector<std::size_t> degree(node_count, 0);
  for (const Edge& e : graph.edges_) {
    ++degree[e.first];
    ++degree[e.second];
  }
  graph.offsets_.assign(node_count + 1, 0);
  for (NodeIndex u = 0; u < node_count; ++u) {
    graph.offsets_[u + 1] = graph.offsets_[u] + degree[u];
  }
  graph.adjacency_.resize(graph.offsets_.back());
  std::vector<std::size_t> cursor(graph.offsets_.begin(), graph.offsets_.end() - 1);
  for (const Edge& e : graph.edges_) {
    graph.adjacency_[cursor[e.first]++] = e.second;
    graph.adjacency_[cursor[e.second]++] = e.first;
  }
  for (NodeIndex u = 0; u < node_count; ++u) {
    auto begin = graph.adjacency_.begin() + static_cast<std::ptrdiff_t>(graph.offsets_[u]);
    auto end = graph.adjacency_.begin() + static_cast<std::ptrdiff_t>(graph.offsets_[u + 1]);
    std::sort(begin, end);
  }
  return graph;
}

bool ItemGraph::has_edge(NodeIndex u, NodeIndex v) const {
  const auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

bool ItemGraph::is_complete() const {
  const std::size_t n = node_count_;
  return n >= 2 && edges_.size() == n * (n - 1) / 2;
}

ItemGraph build_edges(const InteractionStats& stats, const ItemCatalog& catalog,
                      double theta) {
  std::vector<Edge> edges;
  for (const auto& [key, counts] : stats.pairs()) {
    const NodeIndex u = catalog.index_of(key.first);
    const NodeIndex v = catalog.index_of(key.second);
    const std::int64_t score = static_cast<std::int64_t>(counts.co_view) +
                               static_cast<std::int64_t>(counts.view_bought_uv) +
                               static_cast<std::int64_t>(counts.view_bought_vu) -
                               static_cast<std::int64_t>(counts.co_purchase);
    if (static_cast<double>(score) > theta) {
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  return ItemGraph::from_edges(static_cast<NodeIndex>(catalog.size()),
                               std::move(edges));
}

ItemGraph attach_cold_items(const ItemGraph& graph, const ItemCatalog& catalog,
                            const std::vector<ItemId>& cold) {
  if (catalog.size() != graph.node_count()) {
    throw ValidationError("catalog size does not match graph node count");
  }
  std::vector<bool> is_cold(catalog.size(), false);
  for (const ItemId& id : cold) {
    const NodeIndex idx = catalog.index_of(id);
    if (graph.degree(idx) != 0) {
      throw ValidationError("cold item '" + id + "' already has edges");
    }
    is_cold[idx] = true;
  }
  if (std::all_of(is_cold.begin(), is_cold.end(), [](bool b) { return b; })) {
    throw ValidationError("no attachment targets");
  }

  std::vector<Edge> edges = graph.edges();
  for (NodeIndex i = 0; i < catalog.size(); ++i) {
    if (!is_cold[i]) continue;
    const auto& anchor = catalog.item(i).embedding;
    if (anchor.empty()) {
      throw ValidationError("cold item '" + catalog.item(i).id +
                            "' has no embedding");
    }
    NodeIndex best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (NodeIndex j = 0; j < catalog.size(); ++j) {
      if (j == i || is_cold[j]) continue;
      const double score = dot(anchor, catalog.item(j).embedding);
      if (!found || score > best_score) {  // ties keep the lowest index
        best = j;
        best_score = score;
        found = true;
      }
    }
    edges.emplace_back(std::min(i, best), std::max(i, best));
  }
  return ItemGraph::from_edges(graph.node_count(), std::move(edges));
}

EdgeSplit split_edges(const ItemGraph& graph, double train_fraction,
                      std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must be in (0, 1)");
  }
  if (graph.edge_count() < 2) {
    throw ValidationError("graph must have at least 2 edges to split");
  }
  std::vector<Edge> shuffled = graph.edges();
  Rng rng(seed);
  rng.shuffle(shuffled);

  const auto train_count = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(shuffled.size())));

  EdgeSplit split;
  split.split_seed = seed;
  split.train_fraction = train_fraction;
  split.train_edges.assign(shuffled.begin(),
                           shuffled.begin() + static_cast<std::ptrdiff_t>(train_count));
  split.test_edges.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(train_count),
                          shuffled.end());
  std::sort(split.train_edges.begin(), split.train_edges.end());
  std::sort(split.test_edges.begin(), split.test_edges.end());
  return split;
}

}  // namespace gmvo
