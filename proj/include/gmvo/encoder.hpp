#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gmvo/graph.hpp"
#include "gmvo/matrix.hpp"

namespace gmvo {

enum class ModelKind { gcn, gat };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// GCN parameters: one weight matrix per hop, weights[k] maps
/// d_k -> d_{k+1} (applied as H * W).
struct GcnParams {
  std::vector<Matrix> weights;
};

/// GAT layer: projection plus an attention vector of length 2*d_out that
/// scores the concatenation [W h_u | W h_v].
struct GatLayerParams {
  Matrix weight;
  std::vector<double> attention;
};

struct GatParams {
  std::vector<GatLayerParams> layers;
};

using ModelParams = std::variant<GcnParams, GatParams>;

ModelKind kind_of(const ModelParams& params);
std::size_t hop_count(const ModelParams& params);

/// Layer dimensions [d_0, ..., d_K] implied by the parameter shapes.
std::vector<std::size_t> layer_dims(const ModelParams& params);

/// Glorot-uniform initialization (bound sqrt(6/(fan_in+fan_out))), values
/// rounded to float32 so parameters stay exactly representable in the
/// checkpoint format. `dims` is [d_0, ..., d_K].
ModelParams init_params(ModelKind kind, const std::vector<std::size_t>& dims,
                        std::uint64_t seed);

/// Symmetric-normalized neighborhood sum S*H with self-loop-augmented
/// degrees: row u gets sum over N(u) and u itself of h_v / sqrt(d~u * d~v).
/// S is symmetric, which the backward pass relies on.
Matrix gcn_aggregate(const ItemGraph& graph, const Matrix& h);

/// One GCN hop: symmetric-normalized aggregation over N(u) and u itself
/// with self-loop-augmented degrees, then linear map, then ReLU. Nodes of
/// degree 0 reduce exactly to ReLU(W h_u).
Matrix gcn_layer(const ItemGraph& graph, const Matrix& h_prev, const Matrix& weight);

/// Attention weights of one node over a non-empty neighbor list:
/// softmax over exp(a^T [W h_u | W h_v]), computed with max subtraction.
/// Weights are positive and sum to 1.
std::vector<double> gat_attention(std::span<const double> h_u,
                                  const std::vector<std::vector<double>>& neighbors_h,
                                  const Matrix& weight,
                                  std::span<const double> attention);

/// One GAT hop: attention-weighted aggregation of W h_v over N(u) plus the
/// node itself, then ReLU. Isolated nodes reduce to ReLU(W h_u).
Matrix gat_layer(const ItemGraph& graph, const Matrix& h_prev, const Matrix& weight,
                 std::span<const double> attention);

/// Applies all hops starting from h^0 = X and returns the final embeddings.
Matrix encode(const ItemGraph& graph, const Matrix& x, const ModelParams& params);

// --- forward caches (consumed by training::backward) ---

struct GcnLayerCache {
  Matrix aggregated;  ///< S * H_prev
  Matrix preact;      ///< aggregated * W
};

struct GatLayerCache {
  Matrix projected;           ///< M = H_prev * W
  std::vector<double> alpha;  ///< attention weights, self-augmented CSR layout
  Matrix preact;              ///< per-node alpha-weighted sum of projected rows
};

/// Neighbor lists augmented with the node itself (sorted neighbors, self
/// last). Shared by the GAT forward and backward passes.
struct SelfAugmentedAdjacency {
  std::vector<std::size_t> offsets;
  std::vector<NodeIndex> nodes;

  static SelfAugmentedAdjacency build(const ItemGraph& graph);
};

struct ForwardCache {
  std::vector<Matrix> inputs;  ///< H_0 .. H_{K-1}
  std::vector<GcnLayerCache> gcn_layers;
  std::vector<GatLayerCache> gat_layers;
  Matrix output;  ///< Z = H_K
};

ForwardCache encode_cached(const ItemGraph& graph, const Matrix& x,
                           const ModelParams& params);

}  // namespace gmvo
