#include "gmvo/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "gmvo/errors.hpp"
#include "gmvo/rng.hpp"

namespace gmvo {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_layer_shapes(const ItemGraph& graph, const Matrix& h_prev,
                        const Matrix& weight, const char* op) {
  if (h_prev.rows() != graph.node_count()) {
    throw ValidationError(std::string(op) + ": hidden state rows " +
                          std::to_string(h_prev.rows()) + " vs graph nodes " +
                          std::to_string(graph.node_count()));
  }
  if (weight.rows() != h_prev.cols()) {
    throw ValidationError(std::string(op) + ": shape mismatch, hidden " +
                          shape_of(h_prev) + " vs weight " + shape_of(weight));
  }
  if (!h_prev.all_finite()) {
    throw ValidationError(std::string(op) + ": non-finite hidden state");
  }
}

std::vector<double> inverse_sqrt_augmented_degrees(const ItemGraph& graph) {
  std::vector<double> inv(graph.node_count());
  for (NodeIndex u = 0; u < graph.node_count(); ++u) {
    inv[u] = 1.0 / std::sqrt(static_cast<double>(graph.degree(u)) + 1.0);
  }
  return inv;
}

// Row-vector times matrix, accumulating over input coordinates in ascending
// order (bitwise identical to the corresponding matmul row).
std::vector<double> project_row(std::span<const double> h, const Matrix& weight) {
  std::vector<double> out(weight.cols(), 0.0);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hk = h[k];
    if (hk == 0.0) continue;
    const auto wrow = weight.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += hk * wrow[j];
  }
  return out;
}

// Softmax over raw scores with max subtraction; writes into `alpha`.
void stable_softmax(std::span<const double> scores, std::span<double> alpha) {
  double max_score = scores[0];
  for (double s : scores) max_score = std::max(max_score, s);
  double denom = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    alpha[i] = std::exp(scores[i] - max_score);
    denom += alpha[i];
  }
  for (std::size_t i = 0; i < scores.size(); ++i) alpha[i] /= denom;
}

}  // namespace

std::string to_string(ModelKind kind) {
  return kind == ModelKind::gcn ? "gcn" : "gat";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "gcn") return ModelKind::gcn;
  if (name == "gat") return ModelKind::gat;
  throw ValidationError("unknown model kind '" + name + "'");
}

ModelKind kind_of(const ModelParams& params) {
  return std::holds_alternative<GcnParams>(params) ? ModelKind::gcn : ModelKind::gat;
}

std::size_t hop_count(const ModelParams& params) {
  if (const auto* gcn = std::get_if<GcnParams>(&params)) return gcn->weights.size();
  return std::get<GatParams>(params).layers.size();
}

std::vector<std::size_t> layer_dims(const ModelParams& params) {
  std::vector<std::size_t> dims;
  auto push = [&dims](const Matrix& w) {
    if (dims.empty()) dims.push_back(w.rows());
    dims.push_back(w.cols());
  };
  if (const auto* gcn = std::get_if<GcnParams>(&params)) {
    for (const Matrix& w : gcn->weights) push(w);
  } else {
    for (const GatLayerParams& layer : std::get<GatParams>(params).layers) {
      push(layer.weight);
    }
  }
  return dims;
}

ModelParams init_params(ModelKind kind, const std::vector<std::size_t>& dims,
                        std::uint64_t seed) {
  if (dims.size() < 2) {
    throw ValidationError("init_params: need at least one layer");
  }
  Rng rng(seed);
  auto quantize = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  auto glorot_matrix = [&](std::size_t rows, std::size_t cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (double& v : w.values()) v = quantize(rng.uniform(-bound, bound));
    return w;
  };

  if (kind == ModelKind::gcn) {
    GcnParams params;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      params.weights.push_back(glorot_matrix(dims[k], dims[k + 1]));
    }
    return params;
  }
  GatParams params;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    GatLayerParams layer;
    layer.weight = glorot_matrix(dims[k], dims[k + 1]);
    const std::size_t attn_len = 2 * dims[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(attn_len + 1));
    layer.attention.resize(attn_len);
    for (double& v : layer.attention) v = quantize(rng.uniform(-bound, bound));
    params.layers.push_back(std::move(layer));
  }
  return params;
}

SelfAugmentedAdjacency SelfAugmentedAdjacency::build(const ItemGraph& graph) {
  SelfAugmentedAdjacency adj;
  adj.offsets.assign(graph.node_count() + 1, 0);
  for (NodeIndex u = 0; u < graph.node_count(); ++u) {
    adj.offsets[u + 1] = adj.offsets[u] + graph.degree(u) + 1;
  }
  adj.nodes.resize(adj.offsets.back());
  for (NodeIndex u = 0; u < graph.node_count(); ++u) {
    std::size_t pos = adj.offsets[u];
    for (NodeIndex v : graph.neighbors(u)) adj.nodes[pos++] = v;
    adj.nodes[pos] = u;  // self last
  }
  return adj;
}

Matrix gcn_aggregate(const ItemGraph& graph, const Matrix& h) {
  if (h.rows() != graph.node_count()) {
    throw ValidationError("gcn_aggregate: matrix rows " + std::to_string(h.rows()) +
                          " vs graph nodes " + std::to_string(graph.node_count()));
  }
  const std::vector<double> inv_sqrt = inverse_sqrt_augmented_degrees(graph);
  Matrix out(h.rows(), h.cols());
  for (NodeIndex u = 0; u < graph.node_count(); ++u) {
    auto dst = out.row(u);
    for (NodeIndex v : graph.neighbors(u)) {
      const double w = inv_sqrt[u] * inv_sqrt[v];
      const auto src = h.row(v);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
    const double w_self = inv_sqrt[u] * inv_sqrt[u];
    const auto self = h.row(u);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w_self * self[j];
  }
  return out;
}

namespace {

GcnLayerCache gcn_layer_cached(const ItemGraph& graph, const Matrix& h_prev,
                               const Matrix& weight) {
  check_layer_shapes(graph, h_prev, weight, "gcn_layer");
  GcnLayerCache cache;
  cache.aggregated = gcn_aggregate(graph, h_prev);
  cache.preact = matmul(cache.aggregated, weight);
  return cache;
}

GatLayerCache gat_layer_cached(const ItemGraph& graph, const Matrix& h_prev,
                               const Matrix& weight,
                               std::span<const double> attention,
                               const SelfAugmentedAdjacency& adj) {
  check_layer_shapes(graph, h_prev, weight, "gat_layer");
  const std::size_t d_out = weight.cols();
  if (attention.size() != 2 * d_out) {
    throw ValidationError("gat_layer: attention vector length " +
                          std::to_string(attention.size()) + " vs required " +
                          std::to_string(2 * d_out) + " (weight " +
                          shape_of(weight) + ")");
  }
  const auto attn_self = attention.subspan(0, d_out);
  const auto attn_nbr = attention.subspan(d_out, d_out);

  GatLayerCache cache;
  cache.projected = matmul(h_prev, weight);

  // e(u,v) = a_self . m_u + a_nbr . m_v; precompute both halves per node.
  std::vector<double> self_score(graph.node_count());
  std::vector<double> nbr_score(graph.node_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    self_score[v] = dot(attn_self, cache.projected.row(v));
    nbr_score[v] = dot(attn_nbr, cache.projected.row(v));
  }

  cache.alpha.assign(adj.nodes.size(), 0.0);
  cache.preact = Matrix(h_prev.rows(), d_out);
  std::vector<double> scores;
  for (NodeIndex u = 0; u < graph.node_count(); ++u) {
    const std::size_t begin = adj.offsets[u];
    const std::size_t count = adj.offsets[u + 1] - begin;
    scores.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      scores[i] = self_score[u] + nbr_score[adj.nodes[begin + i]];
    }
    stable_softmax(scores, std::span<double>(cache.alpha).subspan(begin, count));

    auto out = cache.preact.row(u);
    for (std::size_t i = 0; i < count; ++i) {
      const double a = cache.alpha[begin + i];
      const auto src = cache.projected.row(adj.nodes[begin + i]);
      for (std::size_t j = 0; j < d_out; ++j) out[j] += a * src[j];
    }
  }
  return cache;
}

}  // namespace

Matrix gcn_layer(const ItemGraph& graph, const Matrix& h_prev, const Matrix& weight) {
  return relu(gcn_layer_cached(graph, h_prev, weight).preact);
}

std::vector<double> gat_attention(std::span<const double> h_u,
                                  const std::vector<std::vector<double>>& neighbors_h,
                                  const Matrix& weight,
                                  std::span<const double> attention) {
  if (neighbors_h.empty()) {
    throw ValidationError("no neighbors");
  }
  const std::size_t d_out = weight.cols();
  if (h_u.size() != weight.rows()) {
    throw ValidationError("gat_attention: input length " +
                          std::to_string(h_u.size()) + " vs weight " +
                          shape_of(weight));
  }
  if (attention.size() != 2 * d_out) {
    throw ValidationError("gat_attention: attention vector length " +
                          std::to_string(attention.size()) + " vs required " +
                          std::to_string(2 * d_out));
  }
  const auto attn_self = attention.subspan(0, d_out);
  const auto attn_nbr = attention.subspan(d_out, d_out);

  const std::vector<double> m_u = project_row(h_u, weight);
  const double self_score = dot(attn_self, m_u);

  std::vector<double> scores(neighbors_h.size());
  for (std::size_t i = 0; i < neighbors_h.size(); ++i) {
    if (neighbors_h[i].size() != weight.rows()) {
      throw ValidationError("gat_attention: neighbor " + std::to_string(i) +
                            " length " + std::to_string(neighbors_h[i].size()) +
                            " vs weight " + shape_of(weight));
    }
    const std::vector<double> m_v = project_row(neighbors_h[i], weight);
    scores[i] = self_score + dot(attn_nbr, m_v);
  }
  std::vector<double> alpha(scores.size());
  stable_softmax(scores, alpha);
  return alpha;
}

Matrix gat_layer(const ItemGraph& graph, const Matrix& h_prev, const Matrix& weight,
                 std::span<const double> attention) {
  const auto adj = SelfAugmentedAdjacency::build(graph);
  return relu(gat_layer_cached(graph, h_prev, weight, attention, adj).preact);
}

Matrix encode(const ItemGraph& graph, const Matrix& x, const ModelParams& params) {
  return encode_cached(graph, x, params).output;
}

ForwardCache encode_cached(const ItemGraph& graph, const Matrix& x,
                           const ModelParams& params) {
  if (x.rows() != graph.node_count()) {
    throw ValidationError("encode: feature rows " + std::to_string(x.rows()) +
                          " vs graph nodes " + std::to_string(graph.node_count()));
  }
  ForwardCache cache;
  Matrix h = x;
  if (const auto* gcn = std::get_if<GcnParams>(&params)) {
    for (const Matrix& w : gcn->weights) {
      cache.inputs.push_back(h);
      cache.gcn_layers.push_back(gcn_layer_cached(graph, h, w));
      h = relu(cache.gcn_layers.back().preact);
    }
  } else {
    const auto adj = SelfAugmentedAdjacency::build(graph);
    for (const GatLayerParams& layer : std::get<GatParams>(params).layers) {
      cache.inputs.push_back(h);
      cache.gat_layers.push_back(
          gat_layer_cached(graph, h, layer.weight, layer.attention, adj));
      h = relu(cache.gat_layers.back().preact);
    }
  }
  if (!h.all_finite()) {
    throw ValidationError("encode: non-finite output embedding");
  }
  cache.output = std::move(h);
  return cache;
}

}  // namespace gmvo
