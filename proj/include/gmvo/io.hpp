#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmvo/catalog.hpp"
#include "gmvo/graph.hpp"
#include "gmvo/interactions.hpp"
#include "gmvo/matrix.hpp"
#include "gmvo/rank_eval.hpp"
#include "gmvo/training.hpp"

namespace gmvo {

// Delimited-text formats. Every file carries a header row with exact column
// names; parse errors report file and line number. Doubles are written with
// the shortest representation that round-trips exactly.

std::string format_double(double v);

/// Catalog: `item_id,raw_price`. An empty price field marks a missing
/// price (left NaN; impute before use).
ItemCatalog load_catalog(const std::filesystem::path& path);
void write_catalog(const std::filesystem::path& path, const ItemCatalog& catalog);

/// Loads the catalog, imputes missing prices and normalizes.
ItemCatalog load_catalog_prepared(const std::filesystem::path& path);

/// Embedding matrix: magic "GMVOEMB1", u64le rows, u64le cols, then
/// rows*cols float32le values row-major. Row i belongs to catalog row i.
Matrix load_embedding_matrix(const std::filesystem::path& path);
void write_embedding_matrix(const std::filesystem::path& path, const Matrix& m);

/// Interactions: `u_id,v_id,cv,vb_uv,vb_vu,cp`, one line per unordered
/// pair. Ids are validated against the catalog when one is given.
InteractionStats load_interactions(const std::filesystem::path& path,
                                   const ItemCatalog* catalog = nullptr);
void write_interactions(const std::filesystem::path& path,
                        const InteractionStats& stats);

/// Edge list: `u_id,v_id,score`, u_id < v_id, sorted by (u_id, v_id).
struct EdgeListEntry {
  ItemId u;
  ItemId v;
  std::int64_t score = 0;
};
void write_edge_list(const std::filesystem::path& path,
                     std::vector<EdgeListEntry> entries);
std::vector<EdgeListEntry> load_edge_list(const std::filesystem::path& path);
ItemGraph graph_from_edge_list(const std::vector<EdgeListEntry>& entries,
                               const ItemCatalog& catalog);
std::vector<EdgeListEntry> edge_list_from_graph(const ItemGraph& graph,
                                                const InteractionStats& stats,
                                                const ItemCatalog& catalog);

/// Candidate sets: `anchor_id,candidate_id`, grouped on load.
std::vector<CandidateSet> load_candidate_sets(const std::filesystem::path& path);
void write_candidate_sets(const std::filesystem::path& path,
                          const std::vector<CandidateSet>& sets);

/// Transactions: `item_id,bucket,count`.
TransactionTable load_transactions(const std::filesystem::path& path);
void write_transactions(const std::filesystem::path& path,
                        const TransactionTable& table);

/// Labels: `anchor_id,candidate_id,rel` with rel in {0,1}.
RelevanceLabels load_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const RelevanceLabels& labels);

/// Rankings: `anchor_id,candidate_id,rank,score`, rank 1-based, sorted by
/// (anchor_id, rank).
struct RankingRow {
  ItemId anchor;
  ItemId candidate;
  int rank = 0;
  double score = 0.0;
};
void write_rankings(const std::filesystem::path& path,
                    const std::vector<RankingRow>& rows);
std::vector<RankingRow> load_rankings(const std::filesystem::path& path);

/// Run log: `epoch,loss,wall_ms`.
void write_run_log(const std::filesystem::path& path,
                   const std::vector<EpochRecord>& history);

/// Sweep table: `lambda,ndcg_at_k,egmv_at_k`.
void write_sweep_table(const std::filesystem::path& path,
                       const std::vector<SweepRow>& rows);
/// Human-readable aligned sweep table.
std::string render_sweep_table(const std::vector<SweepRow>& rows, std::size_t k);

}  // namespace gmvo
