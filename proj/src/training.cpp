#include "gmvo/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gmvo/errors.hpp"
#include "gmvo/rng.hpp"

namespace gmvo {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void relu_backward_inplace(Matrix& grad, const Matrix& preact) {
  // relu'(0) = 0 by convention, hence the strict comparison.
  auto g = grad.values();
  const auto p = preact.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(p[i] > 0.0)) g[i] = 0.0;
  }
}

void append_values(std::vector<double>& flat, std::span<const double> values) {
  flat.insert(flat.end(), values.begin(), values.end());
}

}  // namespace

void TrainConfig::validate() const {
  if (hops < 1) throw ValidationError("hops must be at least 1");
  if (output_dim < 1) throw ValidationError("output dimension must be at least 1");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train fraction must be in (0, 1)");
  }
  if (margin_delta < 0.0) throw ValidationError("margin delta must be nonnegative");
  Lambda check(lambda.value);  // re-validates range
  (void)check;
}

std::vector<double> flatten_params(const ModelParams& params) {
  std::vector<double> flat;
  if (const auto* gcn = std::get_if<GcnParams>(&params)) {
    for (const Matrix& w : gcn->weights) append_values(flat, w.values());
  } else {
    for (const GatLayerParams& layer : std::get<GatParams>(params).layers) {
      append_values(flat, layer.weight.values());
      append_values(flat, layer.attention);
    }
  }
  return flat;
}

void assign_params(ModelParams& params, std::span<const double> flat) {
  std::size_t pos = 0;
  auto take = [&](std::span<double> dst) {
    if (pos + dst.size() > flat.size()) {
      throw ValidationError("flat parameter vector too short");
    }
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + dst.size()),
              dst.begin());
    pos += dst.size();
  };
  if (auto* gcn = std::get_if<GcnParams>(&params)) {
    for (Matrix& w : gcn->weights) take(w.values());
  } else {
    for (GatLayerParams& layer : std::get<GatParams>(params).layers) {
      take(layer.weight.values());
      take(layer.attention);
    }
  }
  if (pos != flat.size()) {
    throw ValidationError("flat parameter vector length mismatch");
  }
}

std::vector<double> encoder_backward(const ItemGraph& graph,
                                     const ModelParams& params,
                                     const ForwardCache& cache,
                                     const Matrix& grad_z) {
  if (const auto* gcn = std::get_if<GcnParams>(&params)) {
    const std::size_t hops = gcn->weights.size();
    std::vector<Matrix> weight_grads(hops);
    Matrix grad = grad_z;
    for (std::size_t k = hops; k-- > 0;) {
      const GcnLayerCache& layer = cache.gcn_layers[k];
      relu_backward_inplace(grad, layer.preact);
      weight_grads[k] = matmul_transpose_a(layer.aggregated, grad);
      if (k > 0) {
        Matrix grad_agg = matmul_transpose_b(grad, gcn->weights[k]);
        grad = gcn_aggregate(graph, grad_agg);  // S is symmetric
      }
    }
    std::vector<double> flat;
    for (const Matrix& g : weight_grads) append_values(flat, g.values());
    return flat;
  }

  const auto& gat = std::get<GatParams>(params);
  const std::size_t hops = gat.layers.size();
  const auto adj = SelfAugmentedAdjacency::build(graph);
  std::vector<Matrix> weight_grads(hops);
  std::vector<std::vector<double>> attention_grads(hops);
  Matrix grad = grad_z;

  for (std::size_t k = hops; k-- > 0;) {
    const GatLayerCache& layer = cache.gat_layers[k];
    const Matrix& input = cache.inputs[k];
    const Matrix& weight = gat.layers[k].weight;
    const std::size_t d_out = weight.cols();
    const auto attention = std::span<const double>(gat.layers[k].attention);
    const auto attn_self = attention.subspan(0, d_out);
    const auto attn_nbr = attention.subspan(d_out, d_out);

    relu_backward_inplace(grad, layer.preact);

    Matrix grad_projected(layer.projected.rows(), d_out);
    std::vector<double> grad_attn(2 * d_out, 0.0);
    const auto grad_attn_self = std::span<double>(grad_attn).subspan(0, d_out);
    const auto grad_attn_nbr = std::span<double>(grad_attn).subspan(d_out, d_out);

    std::vector<double> grad_alpha;
    for (NodeIndex u = 0; u < graph.node_count(); ++u) {
      const std::size_t begin = adj.offsets[u];
      const std::size_t count = adj.offsets[u + 1] - begin;
      const auto g_out = grad.row(u);

      // out_u = sum_i alpha_i * m_{v_i}
      grad_alpha.resize(count);
      double weighted_sum = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const NodeIndex v = adj.nodes[begin + i];
        const double alpha = layer.alpha[begin + i];
        grad_alpha[i] = dot(g_out, layer.projected.row(v));
        weighted_sum += alpha * grad_alpha[i];
        auto gm = grad_projected.row(v);
        for (std::size_t j = 0; j < d_out; ++j) gm[j] += alpha * g_out[j];
      }

      // softmax backward, then e_i = a_self.m_u + a_nbr.m_{v_i}
      const auto m_u = layer.projected.row(u);
      double grad_e_total = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const NodeIndex v = adj.nodes[begin + i];
        const double alpha = layer.alpha[begin + i];
        const double grad_e = alpha * (grad_alpha[i] - weighted_sum);
        grad_e_total += grad_e;
        const auto m_v = layer.projected.row(v);
        auto gm_v = grad_projected.row(v);
        for (std::size_t j = 0; j < d_out; ++j) {
          grad_attn_nbr[j] += grad_e * m_v[j];
          gm_v[j] += grad_e * attn_nbr[j];
        }
      }
      auto gm_u = grad_projected.row(u);
      for (std::size_t j = 0; j < d_out; ++j) {
        grad_attn_self[j] += grad_e_total * m_u[j];
        gm_u[j] += grad_e_total * attn_self[j];
      }
    }

    weight_grads[k] = matmul_transpose_a(input, grad_projected);
    attention_grads[k] = std::move(grad_attn);
    if (k > 0) grad = matmul_transpose_b(grad_projected, weight);
  }

  std::vector<double> flat;
  for (std::size_t k = 0; k < hops; ++k) {
    append_values(flat, weight_grads[k].values());
    append_values(flat, attention_grads[k]);
  }
  return flat;
}

BackwardResult backward(const ItemGraph& graph, const Matrix& x,
                        const ModelParams& params, const EdgeBatch& batch,
                        std::span<const double> prices, Lambda lambda,
                        LossKind kind, double delta) {
  const ForwardCache cache = encode_cached(graph, x, params);
  const LossGrad loss_grad =
      loss_with_grad_z(batch, cache.output, prices, lambda, kind, delta);
  if (!std::isfinite(loss_grad.loss)) {
    throw DivergenceError("non-finite loss (batch seed " +
                              std::to_string(batch.seed) + ")",
                          batch.seed);
  }
  BackwardResult result;
  result.loss = loss_grad.loss;
  result.grads = encoder_backward(graph, params, cache, loss_grad.grad_z);
  return result;
}

AdamState AdamState::for_parameter_count(std::size_t n) {
  AdamState state;
  state.first_moment.assign(n, 0.0);
  state.second_moment.assign(n, 0.0);
  return state;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ValidationError("adam_step: size mismatch (params " +
                          std::to_string(params.size()) + ", grads " +
                          std::to_string(grads.size()) + ", state " +
                          std::to_string(state.first_moment.size()) + ")");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
    state.second_moment[i] =
        state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.first_moment[i] / bias1;
    const double v_hat = state.second_moment[i] / bias2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

TrainResult train(const ItemGraph& graph, const ItemCatalog& catalog,
                  const TrainConfig& config) {
  config.validate();
  const ItemCatalog normalized = normalize_prices(catalog);
  const Matrix x = normalized.initial_embeddings();
  const std::vector<double> prices = normalized.normalized_prices();

  TrainResult result;
  result.split = split_edges(graph, config.train_fraction, derive_seed(config.seed, 0));
  if (result.split.train_edges.size() < 2) {
    throw ValidationError("fewer than 2 train edges after split");
  }
  const ItemGraph train_graph =
      ItemGraph::from_edges(graph.node_count(), result.split.train_edges);

  std::vector<std::size_t> dims(static_cast<std::size_t>(config.hops) + 1,
                                config.output_dim);
  dims[0] = x.cols();
  result.params = init_params(config.model_kind, dims, derive_seed(config.seed, 1));

  std::vector<double> flat = flatten_params(result.params);
  AdamState state = AdamState::for_parameter_count(flat.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    EdgeBatch batch;
    batch.positives = result.split.train_edges;
    batch.seed = config.seed + static_cast<std::uint64_t>(epoch);
    batch.negatives =
        sample_negatives(train_graph, batch.positives.size(), batch.seed);

    BackwardResult step;
    try {
      step = backward(train_graph, x, result.params, batch, prices, config.lambda,
                      config.loss_kind, config.margin_delta);
    } catch (const DivergenceError&) {
      result.diverged = true;
      result.divergence_epoch = epoch;
      break;  // keep the last finite-loss parameters
    }

    adam_step(flat, step.grads, state, config.learning_rate);
    // Parameters live in float32 precision; all arithmetic stays double.
    for (double& v : flat) v = static_cast<double>(static_cast<float>(v));
    assign_params(result.params, flat);

    const auto finished = std::chrono::steady_clock::now();
    const double wall_ms =
        std::chrono::duration<double, std::milli>(finished - started).count();
    result.history.push_back({epoch, step.loss, wall_ms});
  }
  return result;
}

double link_prediction_accuracy(const Matrix& z, std::span<const double> prices,
                                Lambda lambda, const std::vector<Edge>& positives,
                                const std::vector<Edge>& negatives) {
  if (positives.empty() && negatives.empty()) {
    throw ValidationError("empty batch");
  }
  std::size_t correct = 0;
  auto classify = [&](const Edge& e, bool expected_link) {
    const double dec = decode(z.row(e.first), z.row(e.second), prices[e.first],
                              prices[e.second], lambda);
    const bool predicted = sigmoid(dec) > 0.5;
    if (predicted == expected_link) ++correct;
  };
  for (const Edge& e : positives) classify(e, true);
  for (const Edge& e : negatives) classify(e, false);
  return static_cast<double>(correct) /
         static_cast<double>(positives.size() + negatives.size());
}

}  // namespace gmvo
