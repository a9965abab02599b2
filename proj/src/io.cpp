#include "gmvo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gmvo/binary.hpp"
#include "gmvo/errors.hpp"

namespace gmvo {

namespace {

constexpr const char* kEmbeddingMagic = "GMVOEMB1";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

/// Line-oriented reader for the delimited-text formats.
class DelimitedReader {
 public:
  DelimitedReader(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header)
      : path_(path.string()), in_(path) {
    if (!in_) {
      throw ValidationError("cannot open '" + path_ + "'");
    }
    std::string line;
    if (!std::getline(in_, line)) {
      throw ValidationError(path_ + ": missing header row");
    }
    ++line_number_;
    const auto header = split_fields(line);
    if (header != expected_header) {
      std::string expected;
      for (std::size_t i = 0; i < expected_header.size(); ++i) {
        expected += (i ? "," : "") + expected_header[i];
      }
      throw ValidationError(path_ + ":1: expected header '" + expected + "'");
    }
    column_count_ = expected_header.size();
  }

  /// Next non-empty row; false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_number_;
      if (trim(line).empty()) continue;
      fields = split_fields(line);
      if (fields.size() != column_count_) {
        fail("expected " + std::to_string(column_count_) + " fields, found " +
             std::to_string(fields.size()));
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ValidationError(path_ + ":" + std::to_string(line_number_) + ": " + message);
  }

  double parse_double(const std::string& field) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      if (used != field.size()) fail("malformed number '" + field + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed number '" + field + "'");
    }
  }

  std::uint64_t parse_u64(const std::string& field) const {
    try {
      std::size_t used = 0;
      if (!field.empty() && field[0] == '-') fail("negative count '" + field + "'");
      const std::uint64_t v = std::stoull(field, &used);
      if (used != field.size()) fail("malformed count '" + field + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed count '" + field + "'");
    }
  }

  std::int64_t parse_i64(const std::string& field) const {
    try {
      std::size_t used = 0;
      const std::int64_t v = std::stoll(field, &used);
      if (used != field.size()) fail("malformed integer '" + field + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed integer '" + field + "'");
    }
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_number_ = 0;
  std::size_t column_count_ = 0;
};

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no CRLF translation
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing '" + path.string() + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  // Shortest fixed/scientific form that parses back to the same bits.
  char buffer[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, v);
    if (std::stod(buffer) == v) break;
  }
  return buffer;
}

ItemCatalog load_catalog(const std::filesystem::path& path) {
  DelimitedReader reader(path, {"item_id", "raw_price"});
  std::vector<CatalogItem> items;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    CatalogItem item;
    item.id = fields[0];
    if (item.id.empty()) reader.fail("empty item id");
    if (fields[1].empty()) {
      item.raw_price = std::numeric_limits<double>::quiet_NaN();
    } else {
      item.raw_price = reader.parse_double(fields[1]);
      if (item.raw_price < 0.0) reader.fail("negative price");
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) {
    throw ValidationError(reader.path() + ": empty catalog");
  }
  try {
    return ItemCatalog(std::move(items));
  } catch (const ValidationError& e) {
    throw ValidationError(reader.path() + ": " + e.what());
  }
}

void write_catalog(const std::filesystem::path& path, const ItemCatalog& catalog) {
  auto out = open_for_write(path);
  out << "item_id,raw_price\n";
  for (const CatalogItem& item : catalog.items()) {
    out << item.id << ',' << format_double(item.raw_price) << '\n';
  }
  finish_write(out, path);
}

ItemCatalog load_catalog_prepared(const std::filesystem::path& path) {
  return normalize_prices(impute_missing_prices(load_catalog(path)));
}

Matrix load_embedding_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || bytes.compare(0, 8, kEmbeddingMagic) != 0) {
    throw ValidationError(path.string() + ": not an embedding matrix file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = read_u64le(p + 8);
  const std::uint64_t cols = read_u64le(p + 16);
  if (rows > (1ull << 32) || cols > (1ull << 24)) {
    throw ValidationError(path.string() + ": implausible embedding dimensions " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  const std::uint64_t expected = 24 + rows * cols * 4;
  if (bytes.size() != expected) {
    throw ValidationError(path.string() + ": truncated embedding matrix (expected " +
                          std::to_string(expected) + " bytes, found " +
                          std::to_string(bytes.size()) + ")");
  }
  Matrix m(rows, cols);
  auto values = m.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<double>(read_f32le(p + 24 + 4 * i));
  }
  return m;
}

void write_embedding_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::string bytes;
  bytes.reserve(24 + m.size() * 4);
  bytes.append(kEmbeddingMagic);
  append_u64le(bytes, m.rows());
  append_u64le(bytes, m.cols());
  for (double v : m.values()) append_f32le(bytes, static_cast<float>(v));
  auto out = open_for_write(path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  finish_write(out, path);
}

InteractionStats load_interactions(const std::filesystem::path& path,
                                   const ItemCatalog* catalog) {
  DelimitedReader reader(path, {"u_id", "v_id", "cv", "vb_uv", "vb_vu", "cp"});
  InteractionStats stats;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (catalog) {
      for (int i = 0; i < 2; ++i) {
        if (!catalog->contains(fields[i])) {
          reader.fail("unknown item id '" + fields[i] + "'");
        }
      }
    }
    PairCounts counts;
    counts.co_view = reader.parse_u64(fields[2]);
    counts.view_bought_uv = reader.parse_u64(fields[3]);
    counts.view_bought_vu = reader.parse_u64(fields[4]);
    counts.co_purchase = reader.parse_u64(fields[5]);
    try {
      stats.set(fields[0], fields[1], counts);
    } catch (const ValidationError& e) {
      reader.fail(e.what());
    }
  }
  return stats;
}

void write_interactions(const std::filesystem::path& path,
                        const InteractionStats& stats) {
  auto out = open_for_write(path);
  out << "u_id,v_id,cv,vb_uv,vb_vu,cp\n";
  for (const auto& [key, counts] : stats.pairs()) {
    out << key.first << ',' << key.second << ',' << counts.co_view << ','
        << counts.view_bought_uv << ',' << counts.view_bought_vu << ','
        << counts.co_purchase << '\n';
  }
  finish_write(out, path);
}

void write_edge_list(const std::filesystem::path& path,
                     std::vector<EdgeListEntry> entries) {
  for (EdgeListEntry& e : entries) {
    if (e.v < e.u) std::swap(e.u, e.v);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  auto out = open_for_write(path);
  out << "u_id,v_id,score\n";
  for (const EdgeListEntry& e : entries) {
    out << e.u << ',' << e.v << ',' << e.score << '\n';
  }
  finish_write(out, path);
}

std::vector<EdgeListEntry> load_edge_list(const std::filesystem::path& path) {
  DelimitedReader reader(path, {"u_id", "v_id", "score"});
  std::vector<EdgeListEntry> entries;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields[0] == fields[1]) reader.fail("self-loop edge '" + fields[0] + "'");
    entries.push_back({fields[0], fields[1], reader.parse_i64(fields[2])});
  }
  return entries;
}

ItemGraph graph_from_edge_list(const std::vector<EdgeListEntry>& entries,
                               const ItemCatalog& catalog) {
  std::vector<Edge> edges;
  edges.reserve(entries.size());
  for (const EdgeListEntry& e : entries) {
    const NodeIndex u = catalog.index_of(e.u);
    const NodeIndex v = catalog.index_of(e.v);
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  return ItemGraph::from_edges(static_cast<NodeIndex>(catalog.size()),
                               std::move(edges));
}

std::vector<EdgeListEntry> edge_list_from_graph(const ItemGraph& graph,
                                                const InteractionStats& stats,
                                                const ItemCatalog& catalog) {
  std::vector<EdgeListEntry> entries;
  entries.reserve(graph.edge_count());
  for (const Edge& e : graph.edges()) {
    EdgeListEntry entry;
    entry.u = catalog.item(e.first).id;
    entry.v = catalog.item(e.second).id;
    // Attached cold edges have no interaction row and score 0.
    entry.score = similarity_signal(stats, entry.u, entry.v);
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<CandidateSet> load_candidate_sets(const std::filesystem::path& path) {
  DelimitedReader reader(path, {"anchor_id", "candidate_id"});
  std::map<ItemId, CandidateSet> by_anchor;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields[0] == fields[1]) {
      reader.fail("anchor '" + fields[0] + "' listed as its own candidate");
    }
    CandidateSet& set = by_anchor[fields[0]];
    set.anchor = fields[0];
    if (std::find(set.candidates.begin(), set.candidates.end(), fields[1]) !=
        set.candidates.end()) {
      reader.fail("duplicate candidate '" + fields[1] + "' for anchor '" +
                  fields[0] + "'");
    }
    set.candidates.push_back(fields[1]);
  }
  std::vector<CandidateSet> sets;
  sets.reserve(by_anchor.size());
  for (auto& [anchor, set] : by_anchor) sets.push_back(std::move(set));
  return sets;
}

void write_candidate_sets(const std::filesystem::path& path,
                          const std::vector<CandidateSet>& sets) {
  auto out = open_for_write(path);
  out << "anchor_id,candidate_id\n";
  for (const CandidateSet& set : sets) {
    for (const ItemId& candidate : set.candidates) {
      out << set.anchor << ',' << candidate << '\n';
    }
  }
  finish_write(out, path);
}

TransactionTable load_transactions(const std::filesystem::path& path) {
  DelimitedReader reader(path, {"item_id", "bucket", "count"});
  TransactionTable table;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const std::uint64_t bucket = reader.parse_u64(fields[1]);
    if (bucket > std::numeric_limits<std::uint32_t>::max()) {
      reader.fail("bucket index out of range");
    }
    try {
      table.add(fields[0], static_cast<std::uint32_t>(bucket),
                reader.parse_u64(fields[2]));
    } catch (const ValidationError& e) {
      reader.fail(e.what());
    }
  }
  return table;
}

void write_transactions(const std::filesystem::path& path,
                        const TransactionTable& table) {
  auto out = open_for_write(path);
  out << "item_id,bucket,count\n";
  for (const auto& [key, count] : table.rows()) {
    out << key.first << ',' << key.second << ',' << count << '\n';
  }
  finish_write(out, path);
}

RelevanceLabels load_labels(const std::filesystem::path& path) {
  DelimitedReader reader(path, {"anchor_id", "candidate_id", "rel"});
  RelevanceLabels labels;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const std::uint64_t rel = reader.parse_u64(fields[2]);
    if (rel > 1) reader.fail("relevance must be 0 or 1");
    labels.set(fields[0], fields[1], static_cast<int>(rel));
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const RelevanceLabels& labels) {
  auto out = open_for_write(path);
  out << "anchor_id,candidate_id,rel\n";
  for (const auto& [key, rel] : labels.entries()) {
    out << key.first << ',' << key.second << ',' << rel << '\n';
  }
  finish_write(out, path);
}

void write_rankings(const std::filesystem::path& path,
                    const std::vector<RankingRow>& rows) {
  auto out = open_for_write(path);
  out << "anchor_id,candidate_id,rank,score\n";
  for (const RankingRow& row : rows) {
    out << row.anchor << ',' << row.candidate << ',' << row.rank << ','
        << format_double(row.score) << '\n';
  }
  finish_write(out, path);
}

std::vector<RankingRow> load_rankings(const std::filesystem::path& path) {
  DelimitedReader reader(path, {"anchor_id", "candidate_id", "rank", "score"});
  std::vector<RankingRow> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    RankingRow row;
    row.anchor = fields[0];
    row.candidate = fields[1];
    const std::int64_t rank = reader.parse_i64(fields[2]);
    if (rank < 1) reader.fail("rank must be 1-based");
    row.rank = static_cast<int>(rank);
    row.score = reader.parse_double(fields[3]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_run_log(const std::filesystem::path& path,
                   const std::vector<EpochRecord>& history) {
  auto out = open_for_write(path);
  out << "epoch,loss,wall_ms\n";
  for (const EpochRecord& record : history) {
    out << record.epoch << ',' << format_double(record.loss) << ','
        << format_double(record.wall_ms) << '\n';
  }
  finish_write(out, path);
}

void write_sweep_table(const std::filesystem::path& path,
                       const std::vector<SweepRow>& rows) {
  auto out = open_for_write(path);
  out << "lambda,ndcg_at_k,egmv_at_k\n";
  for (const SweepRow& row : rows) {
    out << format_double(row.lambda) << ',' << format_double(row.ndcg) << ','
        << format_double(row.egmv) << '\n';
  }
  finish_write(out, path);
}

std::string render_sweep_table(const std::vector<SweepRow>& rows, std::size_t k) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%8s  %12s  %12s\n", "lambda",
                ("NDCG@" + std::to_string(k)).c_str(),
                ("EGMV@" + std::to_string(k)).c_str());
  out << line;
  for (const SweepRow& row : rows) {
    std::snprintf(line, sizeof line, "%8.4g  %12.6f  %12.6f\n", row.lambda, row.ndcg,
                  row.egmv);
    out << line;
  }
  return out.str();
}

}  // namespace gmvo
