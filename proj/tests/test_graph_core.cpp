#include <doctest.h>

#include <cmath>
#include <set>

#include "gmvo/catalog.hpp"
#include "gmvo/errors.hpp"
#include "gmvo/graph.hpp"
#include "gmvo/interactions.hpp"
#include "oracle_lib.hpp"

using namespace gmvo;

namespace {

ItemCatalog make_catalog(const std::vector<double>& prices) {
  std::vector<CatalogItem> items;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    items.push_back({"item" + std::to_string(i), prices[i], 0.0, {}});
  }
  return ItemCatalog(std::move(items));
}

ItemCatalog with_embeddings(std::vector<std::vector<double>> rows) {
  std::vector<CatalogItem> items;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    items.push_back({"item" + std::to_string(i), 1.0, 0.0, std::move(rows[i])});
  }
  return ItemCatalog(std::move(items));
}

}  // namespace

TEST_CASE("normalize_prices maps min-max to [0,1]") {
  auto c = normalize_prices(make_catalog({2, 4, 6}));
  CHECK(c.item(0).normalized_price == doctest::Approx(0.0));
  CHECK(c.item(1).normalized_price == doctest::Approx(0.5));
  CHECK(c.item(2).normalized_price == doctest::Approx(1.0));

  auto direct = normalize_prices(make_catalog({1, 3, 9}));
  CHECK(direct.item(0).normalized_price == doctest::Approx(0.0));
  CHECK(direct.item(1).normalized_price == doctest::Approx(0.25));
  CHECK(direct.item(2).normalized_price == doctest::Approx(1.0));
}

TEST_CASE("normalize_prices degenerate catalog normalizes to zero") {
  auto c = normalize_prices(make_catalog({5, 5, 5}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(c.item(i).normalized_price == 0.0);
}

TEST_CASE("normalize_prices rejects an empty catalog") {
  CHECK_THROWS_WITH_AS(normalize_prices(ItemCatalog{}), "empty catalog",
                       ValidationError);
}

TEST_CASE("normalize_prices is idempotent") {
  Rng rng(11);
  std::vector<double> prices(17);
  for (double& p : prices) p = rng.uniform(0.0, 250.0);
  auto once = normalize_prices(make_catalog(prices));
  auto twice = normalize_prices(once);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once.item(i).normalized_price == twice.item(i).normalized_price);
  }
}

TEST_CASE("impute_missing_prices fits the observed distribution") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto c = impute_missing_prices(make_catalog({10, 20, 30, nan, nan}));
  CHECK(std::isfinite(c.item(3).raw_price));
  CHECK(c.item(3).raw_price >= 0.0);
  CHECK(c.item(4).raw_price >= 0.0);
  // deterministic: same input, same imputation
  auto again = impute_missing_prices(make_catalog({10, 20, 30, nan, nan}));
  CHECK(c.item(3).raw_price == again.item(3).raw_price);
  CHECK(c.item(4).raw_price == again.item(4).raw_price);

  // all observed prices equal: imputed value is that price
  auto flat = impute_missing_prices(make_catalog({7, 7, nan}));
  CHECK(flat.item(2).raw_price == 7.0);

  CHECK_THROWS_AS(impute_missing_prices(make_catalog({nan, nan})), ValidationError);
}

TEST_CASE("similarity_signal follows the co-view/co-purchase formula") {
  InteractionStats stats;
  stats.set("a", "b", {5, 2, 1, 3});
  CHECK(similarity_signal(stats, "a", "b") == 5);
  CHECK(similarity_signal(stats, "b", "a") == 5);  // symmetric

  InteractionStats comp;
  comp.set("a", "b", {0, 0, 0, 4});
  CHECK(similarity_signal(comp, "a", "b") == -4);

  CHECK(similarity_signal(stats, "a", "zzz") == 0);  // absent pair
  CHECK_THROWS_AS(similarity_signal(stats, "a", "a"), ValidationError);
}

TEST_CASE("interaction stats keep view-bought direction straight") {
  InteractionStats stats;
  stats.set("b", "a", {0, 9, 2, 0});  // "b viewed then a bought" = 9
  CHECK(stats.get("b", "a").view_bought_uv == 9);
  CHECK(stats.get("a", "b").view_bought_uv == 2);
  CHECK_THROWS_AS(stats.set("a", "b", {1, 0, 0, 0}), ValidationError);  // duplicate
}

TEST_CASE("build_edges keeps pairs strictly above theta") {
  auto catalog = make_catalog({1, 1, 1});
  InteractionStats stats;
  stats.set("item0", "item1", {5, 0, 0, 0});   // Sc = 5
  stats.set("item1", "item2", {0, 0, 0, 0});   // Sc = 0

  auto at_zero = build_edges(stats, catalog, 0.0);
  CHECK(at_zero.has_edge(0, 1));        // 5 > 0
  CHECK_FALSE(at_zero.has_edge(1, 2));  // boundary is strict
  CHECK(at_zero.node_count() == 3);     // isolated nodes retained
}

TEST_CASE("build_edges hand-enumerated 3-item example") {
  auto catalog = make_catalog({1, 1, 1});
  InteractionStats stats;
  stats.set("item0", "item1", {2, 0, 0, 0});   // Sc(A,B) = 2
  stats.set("item1", "item2", {1, 0, 0, 2});   // Sc(B,C) = -1
  auto graph = build_edges(stats, catalog, 1.0);
  CHECK(graph.edge_count() == 1);
  CHECK(graph.has_edge(0, 1));
  CHECK(graph.degree(2) == 0);
}

TEST_CASE("build_edges rejects unknown item ids") {
  auto catalog = make_catalog({1, 1});
  InteractionStats stats;
  stats.set("item0", "ghost", {5, 0, 0, 0});
  CHECK_THROWS_WITH_AS(build_edges(stats, catalog, 0.0),
                       "unknown item id 'ghost'", ValidationError);
}

TEST_CASE("graph symmetry and threshold monotonicity properties") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng.bounded(8));
    auto catalog = make_catalog(std::vector<double>(n, 1.0));
    InteractionStats stats;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (rng.next_double() < 0.5) continue;
        stats.set("item" + std::to_string(u), "item" + std::to_string(v),
                  {rng.bounded(6), rng.bounded(3), rng.bounded(3), rng.bounded(6)});
      }
    }
    auto low = build_edges(stats, catalog, -1.0);
    auto high = build_edges(stats, catalog, 2.0);

    for (NodeIndex u = 0; u < low.node_count(); ++u) {
      for (NodeIndex v : low.neighbors(u)) {
        CHECK(low.has_edge(v, u));  // symmetry
      }
    }
    // raising theta never adds an edge
    for (const Edge& e : high.edges()) CHECK(low.has_edge(e.first, e.second));
  }
}

TEST_CASE("raising co-purchase by one never creates an edge") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    PairCounts counts{rng.bounded(5), rng.bounded(3), rng.bounded(3), rng.bounded(5)};
    auto catalog = make_catalog({1, 1});
    InteractionStats before, after;
    before.set("item0", "item1", counts);
    counts.co_purchase += 1;
    after.set("item0", "item1", counts);
    const double theta = rng.uniform(-3.0, 3.0);
    const bool edge_before = build_edges(before, catalog, theta).edge_count() == 1;
    const bool edge_after = build_edges(after, catalog, theta).edge_count() == 1;
    CHECK((!edge_after || edge_before));  // suppression only removes edges
  }
}

TEST_CASE("attach_cold_items picks the nearest embedding by dot product") {
  // identical vector maximizes the dot product
  auto catalog = with_embeddings({{1, 0}, {1, 0}, {0, 1}});
  auto base = ItemGraph::from_edges(3, {{1, 2}});
  auto attached = attach_cold_items(base, catalog, {"item0"});
  CHECK(attached.has_edge(0, 1));
  CHECK(attached.edge_count() == 2);
}

TEST_CASE("attach_cold_items breaks dot-product ties toward the lowest index") {
  auto catalog = with_embeddings({{2, 0}, {0, 2}, {1, 1}});
  auto base = ItemGraph::from_edges(3, {{0, 1}});
  auto attached = attach_cold_items(base, catalog, {"item2"});
  CHECK(attached.has_edge(0, 2));  // dot = 2 vs 2, index 0 wins
  CHECK_FALSE(attached.has_edge(1, 2));
}

TEST_CASE("attach_cold_items validation") {
  auto catalog = with_embeddings({{1, 0}, {0, 1}});
  auto graph = ItemGraph::from_edges(2, {{0, 1}});
  CHECK_THROWS_AS(attach_cold_items(graph, catalog, {"item0"}), ValidationError);

  auto isolated = ItemGraph::from_edges(2, {});
  CHECK_THROWS_WITH_AS(attach_cold_items(isolated, catalog, {"item0", "item1"}),
                       "no attachment targets", ValidationError);
}

TEST_CASE("attach_cold_items matches the exhaustive scan oracle") {
  Rng rng(9001);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 5 + rng.bounded(30);
    std::vector<std::vector<double>> rows(n, std::vector<double>(8));
    for (auto& row : rows) {
      for (double& v : row) v = rng.uniform(-1.0, 1.0);
    }
    auto catalog = with_embeddings(std::move(rows));
    const NodeIndex cold = static_cast<NodeIndex>(rng.bounded(n));

    std::vector<Edge> edges;  // connect everyone except the cold node
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = u + 1; v < n; ++v) {
        if (u != cold && v != cold && rng.next_double() < 0.3) edges.emplace_back(u, v);
      }
    }
    auto graph = ItemGraph::from_edges(static_cast<NodeIndex>(n), edges);
    auto attached = attach_cold_items(graph, catalog, {catalog.item(cold).id});

    // oracle: scan every non-cold candidate
    NodeIndex best = 0;
    double best_dot = -1e300;
    for (NodeIndex j = 0; j < n; ++j) {
      if (j == cold) continue;
      const double d = dot(catalog.item(cold).embedding, catalog.item(j).embedding);
      if (d > best_dot) {
        best_dot = d;
        best = j;
      }
    }
    CHECK(attached.has_edge(std::min(cold, best), std::max(cold, best)));
    CHECK(attached.edge_count() == graph.edge_count() + 1);
  }
}

TEST_CASE("softmax argmax equals dot-product argmax") {
  Rng rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t count = 2 + rng.bounded(12);
    std::vector<double> dots(count);
    for (double& d : dots) d = rng.uniform(-4.0, 4.0);

    double denom = 0.0;
    for (double d : dots) denom += std::exp(d);
    std::size_t argmax_soft = 0, argmax_dot = 0;
    for (std::size_t i = 1; i < count; ++i) {
      if (std::exp(dots[i]) / denom > std::exp(dots[argmax_soft]) / denom) {
        argmax_soft = i;
      }
      if (dots[i] > dots[argmax_dot]) argmax_dot = i;
    }
    CHECK(argmax_soft == argmax_dot);
  }
}

TEST_CASE("split_edges partitions deterministically") {
  Rng rng(31);
  auto graph = oracles::random_graph(12, 0.4, rng);
  REQUIRE(graph.edge_count() >= 4);

  auto split = split_edges(graph, 0.8, 7);
  auto split_again = split_edges(graph, 0.8, 7);
  CHECK(split.train_edges == split_again.train_edges);
  CHECK(split.test_edges == split_again.test_edges);
  CHECK(split.train_edges.size() ==
        static_cast<std::size_t>(std::llround(0.8 * graph.edge_count())));

  // union is E, intersection empty, for any seed
  for (std::uint64_t seed : {7ull, 8ull, 99ull}) {
    auto s = split_edges(graph, 0.5, seed);
    std::set<Edge> all(s.train_edges.begin(), s.train_edges.end());
    for (const Edge& e : s.test_edges) CHECK(all.insert(e).second);
    CHECK(all.size() == graph.edge_count());
  }
}

TEST_CASE("split_edges 10-edge example and validation") {
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < 10; ++i) edges.emplace_back(i, i + 1);
  auto graph = ItemGraph::from_edges(11, edges);
  auto split = split_edges(graph, 0.8, 7);
  CHECK(split.train_edges.size() == 8);
  CHECK(split.test_edges.size() == 2);

  auto four = ItemGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  auto half = split_edges(four, 0.5, 3);
  CHECK(half.train_edges.size() == 2);
  CHECK(half.test_edges.size() == 2);

  auto tiny = ItemGraph::from_edges(2, {{0, 1}});
  CHECK_THROWS_AS(split_edges(tiny, 0.5, 1), ValidationError);
  CHECK_THROWS_AS(split_edges(four, 1.0, 1), ValidationError);
}

TEST_CASE("graph construction rejects malformed edges") {
  CHECK_THROWS_AS(ItemGraph::from_edges(3, {{1, 1}}), ValidationError);
  CHECK_THROWS_AS(ItemGraph::from_edges(3, {{0, 3}}), ValidationError);
  CHECK_THROWS_AS(ItemGraph::from_edges(3, {{0, 1}, {1, 0}}), ValidationError);
}
