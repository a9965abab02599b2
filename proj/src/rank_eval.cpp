#include "gmvo/rank_eval.hpp"

#include <algorithm>
#include <cmath>

#include "gmvo/errors.hpp"

namespace gmvo {

void TransactionTable::add(const ItemId& item, std::uint32_t bucket,
                           std::uint64_t count) {
  if (!rows_.emplace(std::make_pair(item, bucket), count).second) {
    throw ValidationError("duplicate transaction row for item '" + item +
                          "' bucket " + std::to_string(bucket));
  }
  bucket_count_ = std::max(bucket_count_, bucket + 1);
}

std::uint64_t TransactionTable::count(const ItemId& item, std::uint32_t bucket) const {
  auto it = rows_.find(std::make_pair(item, bucket));
  return it == rows_.end() ? 0 : it->second;
}

void RelevanceLabels::set(const ItemId& anchor, const ItemId& candidate,
                          int relevance) {
  if (relevance != 0 && relevance != 1) {
    throw ValidationError("relevance must be 0 or 1 for pair (" + anchor + ", " +
                          candidate + ")");
  }
  labels_[std::make_pair(anchor, candidate)] = relevance;
}

int RelevanceLabels::get(const ItemId& anchor, const ItemId& candidate) const {
  auto it = labels_.find(std::make_pair(anchor, candidate));
  if (it == labels_.end()) {
    throw ValidationError("missing relevance label for pair (" + anchor + ", " +
                          candidate + ")");
  }
  return it->second;
}

std::size_t RelevanceLabels::relevant_count(const ItemId& anchor) const {
  std::size_t count = 0;
  for (auto it = labels_.lower_bound(std::make_pair(anchor, ItemId()));
       it != labels_.end() && it->first.first == anchor; ++it) {
    count += static_cast<std::size_t>(it->second);
  }
  return count;
}

double weighted_cosine(std::span<const double> z_u, std::span<const double> z_v,
                       double p_u, double p_v, Lambda lambda, bool* degenerate) {
  if (z_u.size() != z_v.size()) {
    throw ValidationError("weighted_cosine: dimension mismatch " +
                          std::to_string(z_u.size()) + " vs " +
                          std::to_string(z_v.size()));
  }
  if (degenerate) *degenerate = false;
  const double norm_u = std::sqrt(dot(z_u, z_u));
  const double norm_v = std::sqrt(dot(z_v, z_v));
  if (norm_u == 0.0 || norm_v == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return (1.0 + lambda.value * (p_u + p_v)) * (dot(z_u, z_v) / (norm_u * norm_v));
}

std::vector<ScoredCandidate> rank_candidates(const CandidateSet& set,
                                             const ItemCatalog& catalog,
                                             const Matrix& z, Lambda lambda,
                                             std::size_t k) {
  if (k < 1) {
    throw ValidationError("rank_candidates: k must be at least 1");
  }
  if (set.candidates.empty()) return {};

  const NodeIndex anchor = catalog.index_of(set.anchor);
  const double p_anchor = catalog.item(anchor).normalized_price;

  std::vector<ScoredCandidate> scored;
  scored.reserve(set.candidates.size());
  for (const ItemId& id : set.candidates) {
    const NodeIndex candidate = catalog.index_of(id);
    const double score =
        weighted_cosine(z.row(anchor), z.row(candidate), p_anchor,
                        catalog.item(candidate).normalized_price, lambda);
    scored.push_back({id, score});
  }
  std::sort(scored.begin(), scored.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

double ndcg_at_k(const std::vector<ItemId>& ranking, const ItemId& anchor,
                 const RelevanceLabels& labels, std::size_t k) {
  if (k < 1) {
    throw ValidationError("ndcg_at_k: k must be at least 1");
  }
  const std::size_t depth = std::min(k, ranking.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    const int rel = labels.get(anchor, ranking[i]);
    if (rel) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const std::size_t relevant = labels.relevant_count(anchor);
  if (relevant == 0) return 0.0;
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(relevant, k); ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal;
}

double egmv_at_k(const std::vector<ItemId>& ranking, const CandidateSet& set,
                 const TransactionTable& transactions, const ItemCatalog& catalog,
                 std::size_t k) {
  const std::size_t depth = std::min(k, ranking.size());
  double egmv = 0.0;
  for (std::uint32_t bucket = 0; bucket < transactions.bucket_count(); ++bucket) {
    std::uint64_t total = 0;
    for (const ItemId& id : set.candidates) {
      total += transactions.count(id, bucket);
    }
    if (total == 0) continue;  // empty bucket contributes nothing
    for (std::size_t i = 0; i < depth; ++i) {
      const std::uint64_t purchases = transactions.count(ranking[i], bucket);
      if (purchases == 0) continue;
      const double price = catalog.item(catalog.index_of(ranking[i])).raw_price;
      if (std::isnan(price)) {
        throw ValidationError("item '" + ranking[i] + "' has no price");
      }
      egmv += (static_cast<double>(purchases) / static_cast<double>(total)) * price;
    }
  }
  return egmv;
}

std::vector<SweepRow> lambda_sweep(const ItemGraph& graph, const ItemCatalog& catalog,
                                   const std::vector<CandidateSet>& candidate_sets,
                                   const TransactionTable& transactions,
                                   const RelevanceLabels& labels,
                                   const TrainConfig& config,
                                   std::vector<double> lambdas, std::size_t metric_k) {
  if (lambdas.empty()) {
    throw ValidationError("lambda sweep needs at least one lambda");
  }
  if (candidate_sets.empty()) {
    throw ValidationError("lambda sweep needs at least one candidate set");
  }
  std::sort(lambdas.begin(), lambdas.end());

  const ItemCatalog normalized = normalize_prices(catalog);
  const Matrix x = normalized.initial_embeddings();

  std::vector<SweepRow> rows;
  for (double lambda_value : lambdas) {
    TrainConfig run = config;
    run.lambda = Lambda(lambda_value);
    const TrainResult trained = train(graph, normalized, run);
    const Matrix z = encode(graph, x, trained.params);

    double ndcg_sum = 0.0;
    double egmv_sum = 0.0;
    for (const CandidateSet& set : candidate_sets) {
      const auto ranked = rank_candidates(set, normalized, z, run.lambda, metric_k);
      std::vector<ItemId> ids;
      ids.reserve(ranked.size());
      for (const auto& entry : ranked) ids.push_back(entry.id);
      ndcg_sum += ndcg_at_k(ids, set.anchor, labels, metric_k);
      egmv_sum += egmv_at_k(ids, set, transactions, normalized, metric_k);
    }
    const double n = static_cast<double>(candidate_sets.size());
    rows.push_back({lambda_value, ndcg_sum / n, egmv_sum / n});
  }
  return rows;
}

}  // namespace gmvo
