#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "procomplete/embedder.hpp"
#include "procomplete/process_model.hpp"
#include "procomplete/recommender.hpp"

namespace procomplete {

/// A (label, type) pair as recommended or expected.
struct ElementRef {
  std::optional<std::string> label;
  ElementType type;

  friend bool operator==(const ElementRef&, const ElementRef&) = default;
  friend auto operator<=>(const ElementRef&, const ElementRef&) = default;
};

/// The true next elements of one query state.
struct GroundTruth {
  std::vector<ElementRef> elements;
};

struct MetricSample {
  double precision_at_k = 0.0;
  double recall_at_k = 0.0;
  double bleu = 0.0;
  double meteor = 0.0;
  double cosine = 0.0;
};

inline constexpr std::size_t kMetricCount = 5;
inline constexpr std::string_view kMetricNames[kMetricCount] = {
    "precision@k", "recall@k", "bleu", "meteor", "cosine"};
double metric_value(const MetricSample& s, std::size_t metric);

std::vector<ElementRef> to_refs(std::span<const Recommendation> recs);

/// Matches in the first k candidates divided by k (not by the list length).
double precision_at_k(std::span<const ElementRef> recs, const GroundTruth& truth,
                      std::size_t k);
/// Fraction of truth elements found in the first k candidates.
double recall_at_k(std::span<const ElementRef> recs, const GroundTruth& truth,
                   std::size_t k);

/// Sentence BLEU: clipped n-gram precision, geometric mean over orders
/// 1..max_order, brevity penalty against the closest reference length,
/// add-one smoothing for orders above one. 0 for an empty candidate.
double bleu(std::string_view candidate, std::span<const std::string> references,
            std::size_t max_order = 4);

/// Suffix-stripping stemmer used by meteor_lite.
std::string stem(std::string_view token);

/// METEOR without the synonym stage: exact then stem unigram alignment,
/// F-mean weighted 9:1 towards recall, fragmentation penalty
/// 0.5 * (chunks / matches)^3, best over references.
double meteor_lite(std::string_view candidate,
                   std::span<const std::string> references);

/// Best cosine between the candidate embedding and any reference embedding.
double cosine_score(std::string_view candidate,
                    std::span<const std::string> references,
                    const EmbeddingProvider& provider);

/// "<Type>: <label>" rendering used as metric text.
std::string metric_text(const ElementRef& e);

/// Scores a ranked list against the truth. Semantic metrics take the best
/// (candidate, reference) pair over the first k candidates.
MetricSample score_recommendations(std::span<const ElementRef> recs,
                                   const GroundTruth& truth, std::size_t k,
                                   const EmbeddingProvider& provider);

/// Memoizing decorator; thread-safe.
class CachedEmbedder final : public EmbeddingProvider {
 public:
  explicit CachedEmbedder(const EmbeddingProvider& inner) : inner_(inner) {}

  const EmbedderDescriptor& descriptor() const noexcept override {
    return inner_.descriptor();
  }
  Embedding embed(std::string_view text) const override;

 private:
  const EmbeddingProvider& inner_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, Embedding> cache_;
};

}  // namespace procomplete
