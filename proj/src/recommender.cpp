#include "procomplete/recommender.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <numeric>
#include <set>
#include <utility>

#include "procomplete/error.hpp"

namespace procomplete {

std::string_view to_string(GraphMode mode) noexcept {
  return mode == GraphMode::TasksOnly ? "tasks-only" : "with-gateways";
}

GraphMode parse_graph_mode(std::string_view text) {
  if (text == "with-gateways") return GraphMode::WithGateways;
  if (text == "tasks-only") return GraphMode::TasksOnly;
  throw Error(ErrorCode::InvalidArgument,
              "unknown mode '" + std::string(text) +
                  "' (expected with-gateways or tasks-only)");
}

ProcessGraph prepare_graph(const ProcessGraph& g, GraphMode mode) {
  return mode == GraphMode::TasksOnly ? contract_gateways(g) : g;
}

bool excluded_when_filtered(const ElementType& type) noexcept {
  return type.is_gateway() || type.is_end_event();
}

SliceIndex::SliceIndex(IndexMeta meta, std::vector<SliceRecord> records,
                       std::vector<Embedding> embeddings)
    : meta_(std::move(meta)),
      records_(std::move(records)),
      embeddings_(std::move(embeddings)) {
  if (records_.size() != embeddings_.size())
    throw Error(ErrorCode::InvalidArgument,
                "index has " + std::to_string(records_.size()) +
                    " records but " + std::to_string(embeddings_.size()) +
                    " embeddings");
  for (const auto& e : embeddings_)
    if (e.dimension() != meta_.embedder.dimension)
      throw Error(ErrorCode::DimensionMismatch,
                  "index embedding of dimension " +
                      std::to_string(e.dimension()) + ", meta says " +
                      std::to_string(meta_.embedder.dimension));
}

namespace {

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

SliceIndex build_index(std::span<const ProcessGraph> corpus,
                       std::size_t slice_length,
                       const EmbeddingProvider& provider, GraphMode mode,
                       std::string created_at) {
  if (slice_length == 0)
    throw Error(ErrorCode::InvalidArgument, "slice length must be >= 1");

  std::vector<SliceRecord> records;
  std::vector<std::string> texts;
  for (const auto& original : corpus) {
    const ProcessGraph g = prepare_graph(original, mode);
    for (auto& s : enumerate_slices(g, slice_length)) {
      SliceRecord r;
      r.slice_text = textualize(s.slice, g);
      r.node_ids = std::move(s.slice.node_ids);
      r.process_id = g.process_id();
      r.next = std::move(s.next);
      texts.push_back(r.slice_text);
      records.push_back(std::move(r));
    }
  }
  if (records.empty())
    throw Error(ErrorCode::EmptyIndex,
                "no process has a slice of length " +
                    std::to_string(slice_length));

  IndexMeta meta;
  meta.slice_length = slice_length;
  meta.embedder = provider.descriptor();
  meta.mode = mode;
  meta.created_at = created_at.empty() ? utc_timestamp() : std::move(created_at);
  return SliceIndex(std::move(meta), std::move(records),
                    provider.embed_batch(texts));
}

std::vector<Recommendation> recommend(const RecommendationQuery& query,
                                      const SliceIndex& index,
                                      const EmbeddingProvider& provider) {
  if (query.graph == nullptr)
    throw Error(ErrorCode::InvalidArgument, "query without a graph");
  if (query.mode != index.meta().mode)
    throw Error(ErrorCode::ModeMismatch,
                "query mode " + std::string(to_string(query.mode)) +
                    " does not match index mode " +
                    std::string(to_string(index.meta().mode)));
  if (!(provider.descriptor() == index.meta().embedder))
    throw Error(ErrorCode::DescriptorMismatch,
                "index was embedded with '" + index.meta().embedder.id +
                    "' (dim " + std::to_string(index.meta().embedder.dimension) +
                    "), provider is '" + provider.descriptor().id + "' (dim " +
                    std::to_string(provider.descriptor().dimension) + ")");
  if (index.empty()) throw Error(ErrorCode::EmptyIndex, "index has no records");

  const ProcessGraph g = prepare_graph(*query.graph, query.mode);
  const auto slices = extract_slices_ending_at(
      g, query.target_node, index.meta().slice_length, query.fallback);
  if (slices.empty())
    throw Error(ErrorCode::NoSliceEndsAtTarget,
                "no slice of length " +
                    std::to_string(index.meta().slice_length) + " ends at '" +
                    query.target_node + "'");

  std::vector<std::string> texts;
  texts.reserve(slices.size());
  for (const auto& s : slices) texts.push_back(textualize(s, g));
  const auto queries = provider.embed_batch(texts);
  const auto m = similarity_matrix(queries, index.embeddings());

  // Pool the rows: each record is ranked by its best query slice.
  const std::size_t count = index.size();
  std::vector<double> best(count, -2.0);
  std::vector<std::size_t> best_row(count, 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < count; ++j) {
      if (row[j] > best[j]) {
        best[j] = row[j];
        best_row[j] = i;
      }
    }
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });

  std::vector<Recommendation> out;
  std::set<std::pair<std::optional<std::string>, ElementType>> seen;
  for (std::size_t j : order) {
    if (out.size() >= query.k) break;
    const auto& record = index.records()[j];
    for (const auto& next : record.next) {
      if (out.size() >= query.k) break;
      if (query.filtered && excluded_when_filtered(next.type)) continue;
      if (!seen.emplace(next.label, next.type).second) continue;
      Recommendation r;
      r.label = next.label;
      r.type = next.type;
      r.score = best[j];
      r.explanation.matched_slice_text = record.slice_text;
      r.explanation.source_process_id = record.process_id;
      r.explanation.similarity = best[j];
      r.explanation.query_slice_text = texts[best_row[j]];
      r.explanation.record = j;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace procomplete
