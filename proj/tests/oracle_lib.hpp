#pragma once

// Test-side reference implementations and shared random-instance machinery.
// Everything here recomputes results through independent code paths (dense
// matrices, scalar loops, exhaustive search) so the library can be checked
// against it rather than against itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmvo/catalog.hpp"
#include "gmvo/encoder.hpp"
#include "gmvo/graph.hpp"
#include "gmvo/matrix.hpp"
#include "gmvo/objective.hpp"
#include "gmvo/rank_eval.hpp"
#include "gmvo/rng.hpp"
#include "gmvo/training.hpp"

namespace oracles {

using gmvo::Edge;
using gmvo::EdgeBatch;
using gmvo::ItemGraph;
using gmvo::Lambda;
using gmvo::LossKind;
using gmvo::Matrix;
using gmvo::ModelKind;
using gmvo::ModelParams;
using gmvo::NodeIndex;
using gmvo::Rng;

inline Matrix dense_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) sum += a.at(i, k) * b.at(k, j);
      out.at(i, j) = sum;
    }
  }
  return out;
}

inline Matrix dense_relu(Matrix m) {
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
  return m;
}

/// D^{-1/2} (A + I) D^{-1/2} with self-loop-augmented degrees, as a dense
/// n x n matrix.
inline Matrix dense_normalized_adjacency(const ItemGraph& graph) {
  const std::size_t n = graph.node_count();
  Matrix s(n, n);
  std::vector<double> inv_sqrt(n);
  for (NodeIndex u = 0; u < n; ++u) {
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(graph.degree(u)) + 1.0);
  }
  for (NodeIndex u = 0; u < n; ++u) {
    s.at(u, u) = inv_sqrt[u] * inv_sqrt[u];
    for (NodeIndex v : graph.neighbors(u)) s.at(u, v) = inv_sqrt[u] * inv_sqrt[v];
  }
  return s;
}

inline Matrix dense_gcn_layer(const ItemGraph& graph, const Matrix& h,
                              const Matrix& w) {
  return dense_relu(dense_matmul(dense_matmul(dense_normalized_adjacency(graph), h), w));
}

/// Full n x n attention matrix over N(u) plus self, built with plain
/// exponentials (no max subtraction).
inline Matrix dense_gat_alpha(const ItemGraph& graph, const Matrix& projected,
                              std::span<const double> attention) {
  const std::size_t n = graph.node_count();
  const std::size_t d = projected.cols();
  Matrix alpha(n, n);
  for (NodeIndex u = 0; u < n; ++u) {
    std::vector<NodeIndex> hood(graph.neighbors(u).begin(), graph.neighbors(u).end());
    hood.push_back(u);
    double denom = 0.0;
    for (NodeIndex v : hood) {
      double e = 0.0;
      for (std::size_t j = 0; j < d; ++j) e += attention[j] * projected.at(u, j);
      for (std::size_t j = 0; j < d; ++j) e += attention[d + j] * projected.at(v, j);
      alpha.at(u, v) = std::exp(e);
      denom += alpha.at(u, v);
    }
    for (NodeIndex v : hood) alpha.at(u, v) /= denom;
  }
  return alpha;
}

inline Matrix dense_gat_layer(const ItemGraph& graph, const Matrix& h,
                              const Matrix& w, std::span<const double> attention) {
  const Matrix projected = dense_matmul(h, w);
  const Matrix alpha = dense_gat_alpha(graph, projected, attention);
  return dense_relu(dense_matmul(alpha, projected));
}

inline Matrix dense_encode(const ItemGraph& graph, const Matrix& x,
                           const ModelParams& params) {
  Matrix h = x;
  if (const auto* gcn = std::get_if<gmvo::GcnParams>(&params)) {
    for (const Matrix& w : gcn->weights) h = dense_gcn_layer(graph, h, w);
  } else {
    for (const auto& layer : std::get<gmvo::GatParams>(params).layers) {
      h = dense_gat_layer(graph, h, layer.weight, layer.attention);
    }
  }
  return h;
}

// --- scalar loss re-evaluations -------------------------------------------

inline double scalar_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double scalar_decode(std::span<const double> zu, std::span<const double> zv,
                            double pu, double pv, double lambda) {
  double inner = 0.0;
  for (std::size_t i = 0; i < zu.size(); ++i) inner += zu[i] * zv[i];
  return (1.0 + lambda * (pu + pv)) * inner;
}

inline double scalar_bce(const EdgeBatch& batch, const Matrix& z,
                         std::span<const double> prices, double lambda) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Edge& e : batch.positives) {
    const double dec = scalar_decode(z.row(e.first), z.row(e.second),
                                     prices[e.first], prices[e.second], lambda);
    total += -std::log(std::max(scalar_sigmoid(dec), 1e-12));
    ++count;
  }
  for (const Edge& e : batch.negatives) {
    const double dec = scalar_decode(z.row(e.first), z.row(e.second),
                                     prices[e.first], prices[e.second], lambda);
    total += -std::log(std::max(1.0 - scalar_sigmoid(dec), 1e-12));
    ++count;
  }
  return total / static_cast<double>(count);
}

inline double scalar_margin(const EdgeBatch& batch, const Matrix& z,
                            std::span<const double> prices, double lambda,
                            double delta) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Edge& p = batch.positives[i];
    const Edge& n = batch.negatives[i];
    const double dp = scalar_decode(z.row(p.first), z.row(p.second),
                                    prices[p.first], prices[p.second], lambda);
    const double dn = scalar_decode(z.row(n.first), z.row(n.second),
                                    prices[n.first], prices[n.second], lambda);
    const double hinge = -dp + dn + delta;
    if (hinge > 0.0) total += hinge;
  }
  return total;
}

// --- metric oracles --------------------------------------------------------

/// NDCG@k where the ideal DCG is found by exhaustive permutation of the
/// candidate list (feasible for small lists).
inline double ndcg_permutation_oracle(const std::vector<int>& relevance_in_rank_order,
                                      std::size_t k) {
  const std::size_t n = relevance_in_rank_order.size();
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, n); ++i) {
    if (relevance_in_rank_order[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> perm = relevance_in_rank_order;
  std::sort(perm.begin(), perm.end());
  double ideal = 0.0;
  do {
    double d = 0.0;
    for (std::size_t i = 0; i < std::min(k, n); ++i) {
      if (perm[i]) d += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    ideal = std::max(ideal, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (ideal == 0.0) return 0.0;
  return dcg / ideal;
}

/// Triple-loop EGMV@k re-evaluation over (rank, bucket, candidate).
inline double egmv_nested_loop_oracle(
    const std::vector<std::string>& ranking,
    const std::vector<std::string>& candidate_set,
    const std::function<std::uint64_t(const std::string&, std::uint32_t)>& tx_count,
    const std::function<double(const std::string&)>& price, std::uint32_t buckets,
    std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
    for (std::uint32_t t = 0; t < buckets; ++t) {
      std::uint64_t denom = 0;
      for (const auto& j : candidate_set) denom += tx_count(j, t);
      if (denom == 0) continue;
      total += static_cast<double>(tx_count(ranking[i], t)) /
               static_cast<double>(denom) * price(ranking[i]);
    }
  }
  return total;
}

// --- finite differences -----------------------------------------------------

inline std::vector<double> central_difference_grads(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> at, double h) {
  std::vector<double> grads(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = at[i];
    at[i] = saved + h;
    const double hi = f(at);
    at[i] = saved - h;
    const double lo = f(at);
    at[i] = saved;
    grads[i] = (hi - lo) / (2.0 * h);
  }
  return grads;
}

inline bool within_rel(double a, double b, double rel, double abs_floor) {
  const double diff = std::abs(a - b);
  if (diff <= abs_floor) return true;
  return diff <= rel * std::max(std::abs(a), std::abs(b));
}

// --- gradient-check instances -----------------------------------------------

struct GradInstance {
  ItemGraph graph;
  Matrix x;
  ModelParams params;
  EdgeBatch batch;
  std::vector<double> prices;
};

inline ItemGraph random_graph(NodeIndex n, double edge_prob, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v = u + 1; v < n; ++v) {
      if (rng.next_double() < edge_prob) edges.emplace_back(u, v);
    }
  }
  return ItemGraph::from_edges(n, std::move(edges));
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                            double scale) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

/// Smallest distance of the forward pass to any non-differentiable point:
/// ReLU pre-activations, hinge arguments, and the BCE log clamp. Central
/// differences are only meaningful when this is comfortably above h.
inline double kink_margin(const ItemGraph& graph, const Matrix& x,
                          const ModelParams& params, const EdgeBatch& batch,
                          std::span<const double> prices, double lambda,
                          LossKind kind, double delta) {
  const auto cache = gmvo::encode_cached(graph, x, params);
  double margin = std::numeric_limits<double>::infinity();
  auto scan_preact = [&margin](const Matrix& preact) {
    for (double v : preact.values()) margin = std::min(margin, std::abs(v));
  };
  for (const auto& layer : cache.gcn_layers) scan_preact(layer.preact);
  for (const auto& layer : cache.gat_layers) scan_preact(layer.preact);

  auto dec_of = [&](const Edge& e) {
    return scalar_decode(cache.output.row(e.first), cache.output.row(e.second),
                         prices[e.first], prices[e.second], lambda);
  };
  if (kind == LossKind::bce) {
    // log clamp engages near |dec| ~ 27.6; keep far away from it
    constexpr double clamp_edge = 27.0;
    for (const Edge& e : batch.positives) {
      margin = std::min(margin, clamp_edge - std::abs(dec_of(e)));
    }
    for (const Edge& e : batch.negatives) {
      margin = std::min(margin, clamp_edge - std::abs(dec_of(e)));
    }
  } else {
    for (std::size_t i = 0; i < batch.positives.size(); ++i) {
      const double hinge =
          -dec_of(batch.positives[i]) + dec_of(batch.negatives[i]) + delta;
      margin = std::min(margin, std::abs(hinge));
    }
  }
  return margin;
}

/// Random instance rejected until its forward pass sits away from kinks.
inline GradInstance build_grad_instance(ModelKind model, LossKind loss,
                                        double lambda, int hops,
                                        std::uint64_t seed, double delta = 1.0) {
  for (std::uint64_t attempt = 0; attempt < 400; ++attempt) {
    Rng rng(gmvo::derive_seed(seed, attempt));
    const auto n = static_cast<NodeIndex>(3 + rng.bounded(18));  // 3..20
    const std::size_t d_in = 2 + rng.bounded(7);                 // 2..8
    const std::size_t d_out = 2 + rng.bounded(7);

    GradInstance inst;
    inst.graph = random_graph(n, 2.5 / static_cast<double>(n), rng);
    if (inst.graph.edge_count() < 2) continue;

    const std::size_t pair_count =
        std::min<std::size_t>(5, inst.graph.edge_count());
    const std::size_t non_edges =
        static_cast<std::size_t>(n) * (n - 1) / 2 - inst.graph.edge_count();
    if (non_edges < pair_count) continue;

    inst.x = random_matrix(n, d_in, rng, 0.8);
    std::vector<std::size_t> dims(static_cast<std::size_t>(hops) + 1, d_out);
    dims[0] = d_in;
    inst.params = gmvo::init_params(model, dims, rng.next_u64());

    std::vector<Edge> shuffled = inst.graph.edges();
    rng.shuffle(shuffled);
    inst.batch.positives.assign(shuffled.begin(),
                                shuffled.begin() + static_cast<std::ptrdiff_t>(pair_count));
    inst.batch.seed = rng.next_u64();
    inst.batch.negatives =
        gmvo::sample_negatives(inst.graph, pair_count, inst.batch.seed);

    inst.prices.resize(n);
    for (double& p : inst.prices) p = rng.next_double();

    if (kink_margin(inst.graph, inst.x, inst.params, inst.batch, inst.prices,
                    lambda, loss, delta) > 3e-3) {
      return inst;
    }
  }
  throw std::runtime_error("could not build a kink-free gradient instance");
}

/// Loss as a function of the flat parameter vector, for finite differencing.
inline double loss_at_flat(const GradInstance& inst, ModelParams shape,
                           double lambda, LossKind kind, double delta,
                           std::span<const double> flat) {
  gmvo::assign_params(shape, flat);
  const Matrix z = gmvo::encode(inst.graph, inst.x, shape);
  return gmvo::loss_with_grad_z(inst.batch, z, inst.prices, Lambda(lambda), kind,
                                delta)
      .loss;
}

}  // namespace oracles
