#include "procomplete/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "procomplete/error.hpp"
#include "procomplete/slicer.hpp"

namespace procomplete {

std::string_view to_string(Algorithm a) noexcept {
  return a == Algorithm::Random ? "random" : "slicing";
}

std::string_view to_string(Configuration c) noexcept {
  return c == Configuration::Filtered ? "filtered" : "all-elements";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "slicing") return Algorithm::Slicing;
  if (text == "random") return Algorithm::Random;
  throw Error(ErrorCode::InvalidArgument,
              "unknown algorithm '" + std::string(text) + "'");
}

Configuration parse_configuration(std::string_view text) {
  if (text == "all-elements") return Configuration::AllElements;
  if (text == "filtered") return Configuration::Filtered;
  throw Error(ErrorCode::InvalidArgument,
              "unknown configuration '" + std::string(text) + "'");
}

void EvalConfig::validate() const {
  if (slice_length == 0 || k == 0 || runs_for_random == 0)
    throw Error(ErrorCode::InvalidArgument,
                "slice length, k and random runs must all be >= 1");
}

std::vector<QueryState> generate_query_states(const ProcessGraph& g) {
  const auto order = depth_first_order(g, /*include_unreached=*/true);
  std::vector<QueryState> states;
  std::vector<std::string> prefix_ids;
  for (std::size_t t = 1; t < order.size(); ++t) {
    const Node& target = g.node_at(order[t - 1]);
    prefix_ids.push_back(target.id);
    GroundTruth truth;
    for (auto& n : g.successors(target.id))
      truth.elements.push_back({std::move(n.label), std::move(n.type)});
    if (truth.elements.empty()) continue;
    states.push_back({g.induced(prefix_ids), target.id, std::move(truth)});
  }
  return states;
}

GroundTruth filter_truth(const GroundTruth& truth) {
  GroundTruth out;
  for (const auto& e : truth.elements)
    if (!excluded_when_filtered(e.type)) out.elements.push_back(e);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

// Neumaier compensated sum.
double stable_sum(std::span<const double> values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

MetricStats summarize(std::span<const double> values) {
  MetricStats s;
  s.samples = values.size();
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    s.mean = *lo;
    return s;
  }
  const double n = static_cast<double>(values.size());
  s.mean = std::clamp(stable_sum(values) / n, *lo, *hi);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - s.mean;
    sq[i] = d * d;
  }
  s.std = std::sqrt(stable_sum(sq) / n);
  return s;
}

void MetricAccumulator::add(const MetricSample& s) {
  for (std::size_t m = 0; m < kMetricCount; ++m)
    values_[m].push_back(metric_value(s, m));
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
  for (std::size_t m = 0; m < kMetricCount; ++m)
    values_[m].insert(values_[m].end(), other.values_[m].begin(),
                      other.values_[m].end());
}

std::array<MetricStats, kMetricCount> MetricAccumulator::stats() const {
  std::array<MetricStats, kMetricCount> out;
  for (std::size_t m = 0; m < kMetricCount; ++m) out[m] = summarize(values_[m]);
  return out;
}

bool EvalReport::empty() const noexcept {
  return std::all_of(cells.begin(), cells.end(),
                     [](const ReportCell& c) { return c.empty(); });
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace {

std::vector<ProcessGraph> without(std::span<const ProcessGraph> corpus,
                                  std::size_t held_out) {
  std::vector<ProcessGraph> train;
  train.reserve(corpus.size() - 1);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (i != held_out) train.push_back(corpus[i]);
  return train;
}

// Query states of one held-out process with the configuration's truth; states
// left without truth are counted as skipped.
std::vector<QueryState> fold_states(const ProcessGraph& held_out,
                                    const EvalConfig& config,
                                    ReportCell& cell) {
  auto states = generate_query_states(prepare_graph(held_out, config.mode));
  cell.states += states.size();
  if (!config.filtered) return states;
  std::vector<QueryState> kept;
  for (auto& s : states) {
    s.truth = filter_truth(s.truth);
    if (s.truth.elements.empty()) {
      ++cell.skipped;
      continue;
    }
    kept.push_back(std::move(s));
  }
  return kept;
}

void require_corpus(std::span<const ProcessGraph> corpus) {
  if (corpus.size() < 2)
    throw Error(ErrorCode::InsufficientCorpus,
                "leave-one-group-out needs at least 2 processes, got " +
                    std::to_string(corpus.size()));
}

}  // namespace

ReportCell logo_cv(std::span<const ProcessGraph> corpus,
                   const EvalConfig& config, const EmbeddingProvider& provider,
                   std::string dataset, const RecommendationObserver& observe) {
  config.validate();
  require_corpus(corpus);
  ReportCell cell;
  cell.dataset = std::move(dataset);
  cell.algorithm = Algorithm::Slicing;
  cell.configuration = config.configuration();

  CachedEmbedder metric_embedder(provider);
  MetricAccumulator acc;
  for (std::size_t fold = 0; fold < corpus.size(); ++fold) {
    const auto train = without(corpus, fold);
    std::optional<SliceIndex> index;
    try {
      index = build_index(train, config.slice_length, provider, config.mode,
                          "fold-" + std::to_string(fold));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyIndex) throw;
    }
    for (const auto& state : fold_states(corpus[fold], config, cell)) {
      if (!index) {
        ++cell.skipped;
        continue;
      }
      RecommendationQuery q;
      q.graph = &state.prefix;
      q.target_node = state.target_node;
      q.k = config.k;
      q.filtered = config.filtered;
      q.mode = config.mode;
      q.fallback = config.fallback;
      std::vector<Recommendation> recs;
      try {
        recs = recommend(q, *index, provider);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoSliceEndsAtTarget) throw;
        ++cell.skipped;
        continue;
      }
      if (observe) observe(state, recs);
      acc.add(score_recommendations(to_refs(recs), state.truth, config.k,
                                    metric_embedder));
    }
  }
  cell.metrics = acc.stats();
  return cell;
}

// ---------------------------------------------------------------------------
// Random baseline

ElementPool ElementPool::from_corpus(std::span<const ProcessGraph> corpus,
                                     bool filtered) {
  std::map<ElementRef, std::size_t> counts;
  std::vector<ElementRef> first_seen;
  for (const auto& g : corpus) {
    for (const auto& n : g.nodes()) {
      if (filtered && excluded_when_filtered(n.type)) continue;
      ElementRef ref{n.label, n.type};
      if (counts[ref]++ == 0) first_seen.push_back(std::move(ref));
    }
  }
  if (first_seen.empty())
    throw Error(ErrorCode::EmptyPool, "no elements to sample from");
  ElementPool pool;
  for (auto& ref : first_seen) {
    pool.counts.push_back(counts[ref]);
    pool.elements.push_back(std::move(ref));
  }
  return pool;
}

std::size_t ElementPool::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::vector<ElementRef> sample_frequency_weighted(const ElementPool& pool,
                                                  std::size_t k,
                                                  std::mt19937_64& rng) {
  std::vector<std::size_t> weights = pool.counts;
  std::size_t remaining = pool.total();
  std::vector<ElementRef> out;
  while (out.size() < k && remaining > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
    std::size_t r = pick(rng);
    std::size_t i = 0;
    while (r >= weights[i]) r -= weights[i++];
    out.push_back(pool.elements[i]);
    remaining -= weights[i];
    weights[i] = 0;
  }
  return out;
}

void random_baseline(const ElementPool& pool,
                     std::span<const QueryState> states,
                     const EvalConfig& config,
                     const EmbeddingProvider& provider, std::mt19937_64& rng,
                     MetricAccumulator& into) {
  for (std::size_t run = 0; run < config.runs_for_random; ++run) {
    for (const auto& state : states) {
      const auto recs = sample_frequency_weighted(pool, config.k, rng);
      into.add(score_recommendations(recs, state.truth, config.k, provider));
    }
  }
}

ReportCell random_logo(std::span<const ProcessGraph> corpus,
                       const EvalConfig& config,
                       const EmbeddingProvider& provider, std::string dataset) {
  config.validate();
  require_corpus(corpus);
  ReportCell cell;
  cell.dataset = std::move(dataset);
  cell.algorithm = Algorithm::Random;
  cell.configuration = config.configuration();

  CachedEmbedder metric_embedder(provider);
  std::mt19937_64 rng(config.seed);
  MetricAccumulator acc;
  for (std::size_t fold = 0; fold < corpus.size(); ++fold) {
    const auto states = fold_states(corpus[fold], config, cell);
    std::vector<ProcessGraph> train;
    for (const auto& g : without(corpus, fold))
      train.push_back(prepare_graph(g, config.mode));
    const auto pool = ElementPool::from_corpus(train, config.filtered);
    random_baseline(pool, states, config, metric_embedder, rng, acc);
  }
  cell.metrics = acc.stats();
  return cell;
}

EvalReport evaluate_dataset(std::span<const ProcessGraph> corpus,
                            const EvalConfig& config,
                            const EmbeddingProvider& provider,
                            const std::string& dataset) {
  EvalReport report;
  report.cells.push_back(logo_cv(corpus, config, provider, dataset));
  report.cells.push_back(random_logo(corpus, config, provider, dataset));
  return report;
}

std::vector<StudyRow> slice_length_study(std::span<const ProcessGraph> corpus,
                                         std::span<const std::size_t> lengths,
                                         EvalConfig config,
                                         const EmbeddingProvider& provider,
                                         const std::string& dataset) {
  std::vector<StudyRow> rows;
  for (std::size_t n : lengths) {
    config.slice_length = n;
    rows.push_back({n, logo_cv(corpus, config, provider, dataset)});
  }
  return rows;
}

}  // namespace procomplete
