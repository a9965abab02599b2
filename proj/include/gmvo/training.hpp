#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmvo/catalog.hpp"
#include "gmvo/encoder.hpp"
#include "gmvo/graph.hpp"
#include "gmvo/objective.hpp"

namespace gmvo {

struct TrainConfig {
  ModelKind model_kind = ModelKind::gcn;
  int hops = 2;
  std::size_t output_dim = 256;
  double learning_rate = 0.1;
  int epochs = 20;
  Lambda lambda{};
  LossKind loss_kind = LossKind::bce;
  double margin_delta = 1.0;
  std::uint64_t seed = 7;
  double train_fraction = 0.9;

  void validate() const;
};

/// Parameters flattened in declaration order: per layer the weight matrix
/// row-major, then (GAT only) the attention vector. This is also the
/// checkpoint serialization order.
std::vector<double> flatten_params(const ModelParams& params);
void assign_params(ModelParams& params, std::span<const double> flat);

struct BackwardResult {
  double loss = 0.0;
  std::vector<double> grads;  ///< aligned with flatten_params order
};

/// Loss forward value and exact reverse-mode gradients w.r.t. every
/// trainable parameter. Throws DivergenceError when the loss is not finite.
BackwardResult backward(const ItemGraph& graph, const Matrix& x,
                        const ModelParams& params, const EdgeBatch& batch,
                        std::span<const double> prices, Lambda lambda,
                        LossKind kind, double delta);

/// Gradient of the loss w.r.t. the layer inputs of the encoder, pushed down
/// from a gradient on Z; returns flattened parameter gradients.
std::vector<double> encoder_backward(const ItemGraph& graph,
                                     const ModelParams& params,
                                     const ForwardCache& cache,
                                     const Matrix& grad_z);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_parameter_count(std::size_t n);
};

/// Standard bias-corrected update, in place. Accumulators stay in double.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate);

struct EpochRecord {
  int epoch = 0;  ///< 1-based
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  EdgeSplit split;
  bool diverged = false;
  int divergence_epoch = 0;  ///< epoch whose loss went non-finite, if any
};

/// Full training loop: split edges, init parameters, then per epoch sample
/// negatives, run forward/backward over all train edges and apply one ADAM
/// step. Deterministic in config.seed. On divergence the last finite-loss
/// parameters are returned with `diverged` set.
TrainResult train(const ItemGraph& graph, const ItemCatalog& catalog,
                  const TrainConfig& config);

/// Fraction of labeled pairs classified correctly at sigmoid(DEC) > 0.5.
double link_prediction_accuracy(const Matrix& z, std::span<const double> prices,
                                Lambda lambda, const std::vector<Edge>& positives,
                                const std::vector<Edge>& negatives);

}  // namespace gmvo
