#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procomplete/embedder.hpp"
#include "procomplete/process_model.hpp"
#include "procomplete/slicer.hpp"

namespace procomplete {

/// Whether graphs keep their gateways or are contracted to tasks and events.
enum class GraphMode { WithGateways, TasksOnly };

std::string_view to_string(GraphMode mode) noexcept;
/// Accepts "with-gateways" / "tasks-only". Throws Error(InvalidArgument).
GraphMode parse_graph_mode(std::string_view text);

/// Applies the mode's graph transformation (gateway contraction or none).
ProcessGraph prepare_graph(const ProcessGraph& g, GraphMode mode);

struct SliceRecord {
  std::string slice_text;
  std::vector<std::string> node_ids;
  std::string process_id;
  std::vector<NextElement> next;

  friend bool operator==(const SliceRecord&, const SliceRecord&) = default;
};

struct IndexMeta {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::size_t slice_length = 3;
  EmbedderDescriptor embedder;
  GraphMode mode = GraphMode::WithGateways;
  std::string created_at;

  friend bool operator==(const IndexMeta&, const IndexMeta&) = default;
};

/// Embedded slices of a corpus. Records and embeddings are parallel arrays so
/// the embeddings can be scored as one contiguous block.
class SliceIndex {
 public:
  SliceIndex() = default;
  /// Throws Error(InvalidArgument) if the arrays differ in length or an
  /// embedding does not match meta.embedder.dimension.
  SliceIndex(IndexMeta meta, std::vector<SliceRecord> records,
             std::vector<Embedding> embeddings);

  const IndexMeta& meta() const noexcept { return meta_; }
  const std::vector<SliceRecord>& records() const noexcept { return records_; }
  const std::vector<Embedding>& embeddings() const noexcept {
    return embeddings_;
  }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  friend bool operator==(const SliceIndex&, const SliceIndex&) = default;

 private:
  IndexMeta meta_;
  std::vector<SliceRecord> records_;
  std::vector<Embedding> embeddings_;
};

/// Embeds every slice of the given length in each (mode-prepared) graph, in
/// corpus order then depth-first order. Throws Error(EmptyIndex) when no
/// graph has a slice of that length.
SliceIndex build_index(std::span<const ProcessGraph> corpus,
                       std::size_t slice_length,
                       const EmbeddingProvider& provider, GraphMode mode,
                       std::string created_at = {});

struct Explanation {
  std::string matched_slice_text;
  std::string source_process_id;
  double similarity = 0.0;
  std::string query_slice_text;
  std::size_t record = 0;
};

struct Recommendation {
  std::optional<std::string> label;
  ElementType type;
  double score = 0.0;
  Explanation explanation;
};

struct RecommendationQuery {
  const ProcessGraph* graph = nullptr;
  std::string target_node;
  std::size_t k = 3;
  bool filtered = false;
  GraphMode mode = GraphMode::WithGateways;
  /// Retry with shorter slices when none of the index length ends at target.
  bool fallback = false;
};

/// Gateways and end events are never recommended in filtered mode.
bool excluded_when_filtered(const ElementType& type) noexcept;

/// Top-k next elements for the query target, ranked by the similarity of the
/// best matching indexed slice; each (label, type) appears once.
/// Throws Error(NoSliceEndsAtTarget | UnknownNode | ModeMismatch |
/// DescriptorMismatch | EmptyIndex).
std::vector<Recommendation> recommend(const RecommendationQuery& query,
                                      const SliceIndex& index,
                                      const EmbeddingProvider& provider);

/// Line-oriented JSON: meta line, one line per record, checksum line
/// (SHA-256 hex of all preceding bytes).
std::string serialize_index(const SliceIndex& index);
/// Throws Error(FormatVersionMismatch | ChecksumMismatch | IoFailure).
SliceIndex deserialize_index(std::string_view bytes);

/// Throws Error(IoFailure) plus everything deserialize_index throws.
void save_index(const SliceIndex& index, const std::string& path);
SliceIndex load_index(const std::string& path);

}  // namespace procomplete
