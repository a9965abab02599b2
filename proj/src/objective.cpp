#include "gmvo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "gmvo/errors.hpp"
#include "gmvo/rng.hpp"

namespace gmvo {

namespace {

constexpr double kLogClamp = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_price(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string("normalized price ") + name +
                          " outside [0, 1]: " + std::to_string(p));
  }
}

void check_pair(const Edge& e, const Matrix& z) {
  if (e.first >= z.rows() || e.second >= z.rows()) {
    throw ValidationError("edge endpoint out of range of embedding matrix");
  }
}

double price_multiplier(std::span<const double> prices, const Edge& e,
                        Lambda lambda) {
  const double p_u = prices[e.first];
  const double p_v = prices[e.second];
  check_price(p_u, "p_u");
  check_price(p_v, "p_v");
  return 1.0 + lambda.value * (p_u + p_v);
}

}  // namespace

Lambda::Lambda(double v) : value(v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ValidationError("lambda must be finite and nonnegative");
  }
}

std::string to_string(LossKind kind) {
  return kind == LossKind::bce ? "bce" : "margin";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "bce") return LossKind::bce;
  if (name == "margin" || name == "max_margin") return LossKind::max_margin;
  throw ValidationError("unknown loss kind '" + name + "'");
}

double decode(std::span<const double> z_u, std::span<const double> z_v, double p_u,
              double p_v, Lambda lambda) {
  if (z_u.size() != z_v.size()) {
    throw ValidationError("decode: embedding dimension mismatch " +
                          std::to_string(z_u.size()) + " vs " +
                          std::to_string(z_v.size()));
  }
  check_price(p_u, "p_u");
  check_price(p_v, "p_v");
  return (1.0 + lambda.value * (p_u + p_v)) * dot(z_u, z_v);
}

double bce_loss(const EdgeBatch& batch, const Matrix& z,
                std::span<const double> prices, Lambda lambda) {
  return loss_with_grad_z(batch, z, prices, lambda, LossKind::bce, 0.0).loss;
}

double max_margin_loss(const EdgeBatch& batch, const Matrix& z,
                       std::span<const double> prices, Lambda lambda, double delta) {
  return loss_with_grad_z(batch, z, prices, lambda, LossKind::max_margin, delta).loss;
}

std::vector<Edge> sample_negatives(const ItemGraph& graph, std::size_t count,
                                   std::uint64_t seed) {
  if (count < 1) {
    throw ValidationError("negative sample count must be at least 1");
  }
  const std::size_t n = graph.node_count();
  const std::size_t total_pairs = n >= 2 ? n * (n - 1) / 2 : 0;
  const std::size_t available = total_pairs - graph.edge_count();
  if (available == 0) {
    throw ValidationError("no negative pairs exist");
  }
  if (count > available) {
    throw ValidationError("requested " + std::to_string(count) +
                          " negatives but only " + std::to_string(available) +
                          " non-edges exist");
  }

  Rng rng(seed);
  std::vector<Edge> drawn;
  drawn.reserve(count);
  std::set<Edge> seen;
  while (drawn.size() < count) {
    const auto u = static_cast<NodeIndex>(rng.bounded(n));
    const auto v = static_cast<NodeIndex>(rng.bounded(n));
    if (u == v) continue;
    const Edge e{std::min(u, v), std::max(u, v)};
    if (graph.has_edge(e.first, e.second)) continue;
    if (!seen.insert(e).second) continue;
    drawn.push_back(e);
  }
  return drawn;
}

LossGrad loss_with_grad_z(const EdgeBatch& batch, const Matrix& z,
                          std::span<const double> prices, Lambda lambda,
                          LossKind kind, double delta) {
  if (batch.positives.empty() && batch.negatives.empty()) {
    throw ValidationError("empty batch");
  }
  if (prices.size() != z.rows()) {
    throw ValidationError("price vector length " + std::to_string(prices.size()) +
                          " vs embedding rows " + std::to_string(z.rows()));
  }

  LossGrad result;
  result.grad_z = Matrix(z.rows(), z.cols());

  auto accumulate_pair_grad = [&](const Edge& e, double coeff) {
    // d dec / d z_u = multiplier * z_v and symmetrically for v.
    auto gu = result.grad_z.row(e.first);
    auto gv = result.grad_z.row(e.second);
    const auto zu = z.row(e.first);
    const auto zv = z.row(e.second);
    for (std::size_t j = 0; j < z.cols(); ++j) {
      gu[j] += coeff * zv[j];
      gv[j] += coeff * zu[j];
    }
  };

  if (kind == LossKind::bce) {
    const double n_terms =
        static_cast<double>(batch.positives.size() + batch.negatives.size());
    double loss = 0.0;
    auto add_term = [&](const Edge& e, double label) {
      check_pair(e, z);
      const double mult = price_multiplier(prices, e, lambda);
      const double dec = mult * dot(z.row(e.first), z.row(e.second));
      const double sig = sigmoid(dec);
      double grad_dec = 0.0;
      if (label == 1.0) {
        loss += -std::log(std::max(sig, kLogClamp));
        if (sig > kLogClamp) grad_dec = sig - 1.0;
      } else {
        loss += -std::log(std::max(1.0 - sig, kLogClamp));
        if (1.0 - sig > kLogClamp) grad_dec = sig;
      }
      accumulate_pair_grad(e, grad_dec * mult / n_terms);
    };
    for (const Edge& e : batch.positives) add_term(e, 1.0);
    for (const Edge& e : batch.negatives) add_term(e, 0.0);
    result.loss = loss / n_terms;
    return result;
  }

  if (batch.positives.size() != batch.negatives.size()) {
    throw ValidationError("max-margin loss needs matched batch sizes, got " +
                          std::to_string(batch.positives.size()) + " positives vs " +
                          std::to_string(batch.negatives.size()) + " negatives");
  }
  if (delta < 0.0) {
    throw ValidationError("margin delta must be nonnegative");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Edge& pos = batch.positives[i];
    const Edge& neg = batch.negatives[i];
    check_pair(pos, z);
    check_pair(neg, z);
    const double mult_pos = price_multiplier(prices, pos, lambda);
    const double mult_neg = price_multiplier(prices, neg, lambda);
    const double dec_pos = mult_pos * dot(z.row(pos.first), z.row(pos.second));
    const double dec_neg = mult_neg * dot(z.row(neg.first), z.row(neg.second));
    const double hinge = -dec_pos + dec_neg + delta;
    if (hinge > 0.0) {  // subgradient at exactly 0 is 0
      loss += hinge;
      accumulate_pair_grad(pos, -mult_pos);
      accumulate_pair_grad(neg, mult_neg);
    }
  }
  result.loss = loss;
  return result;
}

}  // namespace gmvo
