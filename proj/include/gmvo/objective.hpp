#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gmvo/graph.hpp"
#include "gmvo/matrix.hpp"

namespace gmvo {

/// Price/similarity trade-off weight of the decoder; 0 disables the price
/// term entirely.
struct Lambda {
  double value = 0.0;

  Lambda() = default;
  explicit Lambda(double v);
};

enum class LossKind { bce, max_margin };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Positive edges (label 1) and sampled non-edges (label 0). Training
/// batches carry equally many of each; the max-margin loss matches them
/// index-wise.
struct EdgeBatch {
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
  std::uint64_t seed = 0;
};

/// Price-inflated inner product: (1 + lambda*(p_u+p_v)) * (z_u . z_v).
/// Note the multiplier amplifies negative similarities too.
double decode(std::span<const double> z_u, std::span<const double> z_v, double p_u,
              double p_v, Lambda lambda);

/// Mean binary cross-entropy of sigmoid(decode) over all batch pairs,
/// with log arguments clamped below at 1e-12.
double bce_loss(const EdgeBatch& batch, const Matrix& z,
                std::span<const double> prices, Lambda lambda);

/// Hinge loss sum over index-matched (positive, negative) pairs:
/// max(0, -DEC_pos + DEC_neg + delta).
double max_margin_loss(const EdgeBatch& batch, const Matrix& z,
                       std::span<const double> prices, Lambda lambda, double delta);

/// Uniform non-edge pairs (u != v), distinct within the batch,
/// deterministic in `seed`.
std::vector<Edge> sample_negatives(const ItemGraph& graph, std::size_t count,
                                   std::uint64_t seed);

/// Loss value plus its gradient with respect to the embedding matrix.
/// Shared by training and the gradient-check tests.
struct LossGrad {
  double loss = 0.0;
  Matrix grad_z;
};

LossGrad loss_with_grad_z(const EdgeBatch& batch, const Matrix& z,
                          std::span<const double> prices, Lambda lambda,
                          LossKind kind, double delta);

}  // namespace gmvo
