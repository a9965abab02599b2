#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gmvo/catalog.hpp"
#include "gmvo/interactions.hpp"

namespace gmvo {

/// Undirected edge, stored canonically with first < second.
using Edge = std::pair<NodeIndex, NodeIndex>;

/// Immutable undirected item graph with CSR-style sorted neighbor lists.
/// Self-loops are never stored; the GCN aggregation adds the self
/// contribution itself.
class ItemGraph {
 public:
  ItemGraph() = default;

  /// Builds from an edge list. Edges are canonicalized, sorted and checked:
  /// self-loops and duplicates are rejected, endpoints must be < node_count.
  static ItemGraph from_edges(NodeIndex node_count, std::vector<Edge> edges);

  NodeIndex node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }

  std::span<const NodeIndex> neighbors(NodeIndex u) const {
    return {adjacency_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }

  NodeIndex degree(NodeIndex u) const {
    return static_cast<NodeIndex>(offsets_[u + 1] - offsets_[u]);
  }

  bool has_edge(NodeIndex u, NodeIndex v) const;

  /// Canonical edges, sorted ascending.
  const std::vector<Edge>& edges() const { return edges_; }

  bool is_complete() const;

 private:
  NodeIndex node_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeIndex> adjacency_;
  std::vector<Edge> edges_;
};

/// Deterministic partition of a graph's edges.
struct EdgeSplit {
  std::vector<Edge> train_edges;
  std::vector<Edge> test_edges;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.0;
};

/// Thresholded similarity graph: an edge exists iff Sc(u, v) > theta
/// (strictly). Isolated items stay in the node set. Every item referenced
/// by `stats` must exist in the catalog.
ItemGraph build_edges(const InteractionStats& stats, const ItemCatalog& catalog,
                      double theta);

/// Connects each cold (degree-0) item to its nearest non-cold item by
/// initial-embedding dot product, one edge per cold item. The softmax in the
/// underlying formulation is strictly monotone, so the argmax over raw dot
/// products is used directly; ties break toward the lowest item index.
/// Search is exact over all non-cold items.
ItemGraph attach_cold_items(const ItemGraph& graph, const ItemCatalog& catalog,
                            const std::vector<ItemId>& cold);

/// Uniform random edge partition with |train| = round(fraction * |E|),
/// deterministic in `seed`. Requires at least 2 edges.
EdgeSplit split_edges(const ItemGraph& graph, double train_fraction,
                      std::uint64_t seed);

}  // namespace gmvo
