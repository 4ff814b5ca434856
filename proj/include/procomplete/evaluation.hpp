#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procomplete/embedder.hpp"
#include "procomplete/metrics.hpp"
#include "procomplete/process_model.hpp"
#include "procomplete/recommender.hpp"

namespace procomplete {

enum class Algorithm { Slicing, Random };
enum class Configuration { AllElements, Filtered };

std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(Configuration c) noexcept;
Algorithm parse_algorithm(std::string_view text);
Configuration parse_configuration(std::string_view text);

struct EvalConfig {
  std::size_t slice_length = 3;
  std::size_t k = 3;
  bool filtered = false;
  GraphMode mode = GraphMode::WithGateways;
  std::size_t runs_for_random = 30;
  std::uint64_t seed = 7;
  bool fallback = false;

  /// Throws Error(InvalidArgument) when a count is zero.
  void validate() const;
  Configuration configuration() const noexcept {
    return filtered ? Configuration::Filtered : Configuration::AllElements;
  }
};

/// One simulated modelling step: the model built so far, the element just
/// added, and what actually follows it in the finished model.
struct QueryState {
  ProcessGraph prefix;
  std::string target_node;
  GroundTruth truth;
};

/// Elements in depth-first order from the roots (unreached elements follow in
/// declaration order); state t holds the first t elements. States whose
/// target has no successor are dropped.
std::vector<QueryState> generate_query_states(const ProcessGraph& g);

/// Removes gateways and end events from the truth (filtered configuration).
GroundTruth filter_truth(const GroundTruth& truth);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t samples = 0;
};

/// Collects per-state samples; means use compensated summation.
class MetricAccumulator {
 public:
  void add(const MetricSample& s);
  void merge(const MetricAccumulator& other);
  std::size_t size() const noexcept { return values_[0].size(); }
  std::array<MetricStats, kMetricCount> stats() const;

 private:
  std::array<std::vector<double>, kMetricCount> values_;
};

MetricStats summarize(std::span<const double> values);

struct ReportCell {
  std::string dataset;
  Algorithm algorithm = Algorithm::Slicing;
  Configuration configuration = Configuration::AllElements;
  std::array<MetricStats, kMetricCount> metrics{};
  std::size_t states = 0;   // query states generated
  std::size_t skipped = 0;  // states without a usable slice or truth

  bool empty() const noexcept { return metrics[0].samples == 0; }
};

struct EvalReport {
  std::vector<ReportCell> cells;

  bool empty() const noexcept;
};

/// Leave-one-group-out: every process is queried against an index built from
/// the rest of the corpus. Throws Error(InsufficientCorpus) below two
/// processes.
/// Called once per scored state with the recommendations it produced.
using RecommendationObserver =
    std::function<void(const QueryState&, std::span<const Recommendation>)>;

ReportCell logo_cv(std::span<const ProcessGraph> corpus,
                   const EvalConfig& config, const EmbeddingProvider& provider,
                   std::string dataset = "dataset",
                   const RecommendationObserver& observe = {});

/// Elements of the corpus with multiplicities, keyed by (label, type).
struct ElementPool {
  std::vector<ElementRef> elements;
  std::vector<std::size_t> counts;

  /// Throws Error(EmptyPool) if nothing survives filtering.
  static ElementPool from_corpus(std::span<const ProcessGraph> corpus,
                                 bool filtered);
  std::size_t total() const noexcept;
};

/// Draws k distinct elements without replacement, each draw proportional to
/// the remaining frequencies.
std::vector<ElementRef> sample_frequency_weighted(const ElementPool& pool,
                                                  std::size_t k,
                                                  std::mt19937_64& rng);

/// Frequency-weighted random recommender scored on the given states, pooled
/// over config.runs_for_random runs.
void random_baseline(const ElementPool& pool,
                     std::span<const QueryState> states,
                     const EvalConfig& config,
                     const EmbeddingProvider& provider, std::mt19937_64& rng,
                     MetricAccumulator& into);

/// Random baseline under the same leave-one-group-out folds as logo_cv: each
/// fold's pool comes from the training processes only.
ReportCell random_logo(std::span<const ProcessGraph> corpus,
                       const EvalConfig& config,
                       const EmbeddingProvider& provider,
                       std::string dataset = "dataset");

/// Slicing and random cells for one dataset and configuration.
EvalReport evaluate_dataset(std::span<const ProcessGraph> corpus,
                            const EvalConfig& config,
                            const EmbeddingProvider& provider,
                            const std::string& dataset);

struct StudyRow {
  std::size_t slice_length = 0;
  ReportCell cell;
};

/// One logo_cv run per slice length.
std::vector<StudyRow> slice_length_study(std::span<const ProcessGraph> corpus,
                                         std::span<const std::size_t> lengths,
                                         EvalConfig config,
                                         const EmbeddingProvider& provider,
                                         const std::string& dataset);

}  // namespace procomplete
