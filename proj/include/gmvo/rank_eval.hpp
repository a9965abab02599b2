#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gmvo/catalog.hpp"
#include "gmvo/graph.hpp"
#include "gmvo/matrix.hpp"
#include "gmvo/objective.hpp"
#include "gmvo/training.hpp"

namespace gmvo {

/// Recall set for one anchor item. Candidates are distinct and never
/// include the anchor.
struct CandidateSet {
  ItemId anchor;
  std::vector<ItemId> candidates;
};

/// Sparse (item, time-bucket) purchase counts; absent cells count 0.
class TransactionTable {
 public:
  void add(const ItemId& item, std::uint32_t bucket, std::uint64_t count);
  std::uint64_t count(const ItemId& item, std::uint32_t bucket) const;
  std::uint32_t bucket_count() const { return bucket_count_; }
  const std::map<std::pair<ItemId, std::uint32_t>, std::uint64_t>& rows() const {
    return rows_;
  }

 private:
  std::map<std::pair<ItemId, std::uint32_t>, std::uint64_t> rows_;
  std::uint32_t bucket_count_ = 0;
};

/// Binary (anchor, candidate) relevance.
class RelevanceLabels {
 public:
  void set(const ItemId& anchor, const ItemId& candidate, int relevance);
  /// Throws ValidationError naming the pair when the label is missing.
  int get(const ItemId& anchor, const ItemId& candidate) const;
  /// Number of relevant candidates labeled under this anchor.
  std::size_t relevant_count(const ItemId& anchor) const;
  const std::map<std::pair<ItemId, ItemId>, int>& entries() const { return labels_; }

 private:
  std::map<std::pair<ItemId, ItemId>, int> labels_;
};

/// Price-weighted cosine: (1 + lambda*(p_u+p_v)) * cos(z_u, z_v).
/// A zero-norm input makes the score 0 and sets *degenerate when provided
/// (dead embeddings must not crash evaluation).
double weighted_cosine(std::span<const double> z_u, std::span<const double> z_v,
                       double p_u, double p_v, Lambda lambda,
                       bool* degenerate = nullptr);

struct ScoredCandidate {
  ItemId id;
  double score = 0.0;
};

/// Top-min(k, |candidates|) candidates by weighted cosine against the
/// anchor, score descending, ties broken by id ascending.
std::vector<ScoredCandidate> rank_candidates(const CandidateSet& set,
                                             const ItemCatalog& catalog,
                                             const Matrix& z, Lambda lambda,
                                             std::size_t k);

/// NDCG@k of a ranked candidate list under binary labels. The ideal DCG
/// uses the anchor's total relevant count from `labels`, so a truncated
/// ranking still normalizes against the full candidate set. 0 when nothing
/// is relevant.
double ndcg_at_k(const std::vector<ItemId>& ranking, const ItemId& anchor,
                 const RelevanceLabels& labels, std::size_t k);

/// Expected GMV of one anchor's top-k: over ranked items and time buckets,
/// purchase-share-weighted raw price, where the share denominator runs over
/// the anchor's full candidate set. Buckets with no candidate transactions
/// contribute 0.
double egmv_at_k(const std::vector<ItemId>& ranking, const CandidateSet& set,
                 const TransactionTable& transactions, const ItemCatalog& catalog,
                 std::size_t k);

struct SweepRow {
  double lambda = 0.0;
  double ndcg = 0.0;
  double egmv = 0.0;
};

/// Trains one model per lambda (same seed), encodes the full graph, ranks
/// every candidate set and reports mean NDCG@k / mean EGMV@k per lambda,
/// sorted by lambda.
std::vector<SweepRow> lambda_sweep(const ItemGraph& graph, const ItemCatalog& catalog,
                                   const std::vector<CandidateSet>& candidate_sets,
                                   const TransactionTable& transactions,
                                   const RelevanceLabels& labels,
                                   const TrainConfig& config,
                                   std::vector<double> lambdas, std::size_t metric_k);

}  // namespace gmvo
