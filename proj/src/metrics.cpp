#include "procomplete/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "procomplete/slicer.hpp"
#include "procomplete/text.hpp"

namespace procomplete {

double metric_value(const MetricSample& s, std::size_t metric) {
  switch (metric) {
    case 0: return s.precision_at_k;
    case 1: return s.recall_at_k;
    case 2: return s.bleu;
    case 3: return s.meteor;
    default: return s.cosine;
  }
}

std::vector<ElementRef> to_refs(std::span<const Recommendation> recs) {
  std::vector<ElementRef> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back({r.label, r.type});
  return out;
}

namespace {

bool matches_any(const ElementRef& e, std::span<const ElementRef> set) {
  return std::find(set.begin(), set.end(), e) != set.end();
}

}  // namespace

double precision_at_k(std::span<const ElementRef> recs, const GroundTruth& truth,
                      std::size_t k) {
  if (k == 0) return 0.0;
  const auto top = recs.first(std::min(k, recs.size()));
  const auto hits = std::count_if(top.begin(), top.end(), [&](const ElementRef& r) {
    return matches_any(r, truth.elements);
  });
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(std::span<const ElementRef> recs, const GroundTruth& truth,
                   std::size_t k) {
  if (truth.elements.empty()) return 0.0;
  const auto top = recs.first(std::min(k, recs.size()));
  const auto hits = std::count_if(
      truth.elements.begin(), truth.elements.end(),
      [&](const ElementRef& t) { return matches_any(t, top); });
  return static_cast<double>(hits) /
         static_cast<double>(truth.elements.size());
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

using NgramCounts = std::map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens,
                         std::size_t order) {
  NgramCounts counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < order; ++j) {
      key.push_back('\x1f');
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double bleu(std::string_view candidate, std::span<const std::string> references,
            std::size_t max_order) {
  const auto cand = tokenize(candidate);
  if (cand.empty() || references.empty() || max_order == 0) return 0.0;

  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(tokenize(r));

  // Closest reference length, shorter one on ties.
  std::size_t ref_len = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) {
      return len > cand.size() ? len - cand.size() : cand.size() - len;
    };
    if (d(r.size()) < d(ref_len) || (d(r.size()) == d(ref_len) && r.size() < ref_len))
      ref_len = r.size();
  }

  double log_sum = 0.0;
  for (std::size_t order = 1; order <= max_order; ++order) {
    const auto cand_counts = count_ngrams(cand, order);
    NgramCounts max_ref;
    for (const auto& r : refs)
      for (const auto& [gram, c] : count_ngrams(r, order))
        max_ref[gram] = std::max(max_ref[gram], c);

    std::size_t matched = 0, total = 0;
    for (const auto& [gram, c] : cand_counts) {
      total += c;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    double p;
    if (order == 1) {
      if (matched == 0) return 0.0;
      p = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      p = (static_cast<double>(matched) + 1.0) / (static_cast<double>(total) + 1.0);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref_len);
  const double log_bp = c > r ? 0.0 : 1.0 - r / c;
  return std::exp(log_bp + log_sum / static_cast<double>(max_order));
}

// ---------------------------------------------------------------------------
// METEOR-lite

std::string stem(std::string_view token) {
  // Longest suffix first; the stem must keep at least three characters.
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };
  static constexpr std::array kRules = {
      Rule{"ational", "ate"}, Rule{"ations", ""}, Rule{"ation", ""},
      Rule{"ments", ""},      Rule{"ment", ""},   Rule{"ances", ""},
      Rule{"ance", ""},       Rule{"ences", ""},  Rule{"ence", ""},
      Rule{"ings", ""},       Rule{"ing", ""},    Rule{"ions", ""},
      Rule{"ion", ""},        Rule{"ness", ""},   Rule{"edly", ""},
      Rule{"sses", "ss"},     Rule{"ies", "y"},   Rule{"ied", "y"},
      Rule{"ers", ""},        Rule{"ss", "ss"},
      Rule{"er", ""},         Rule{"ed", ""},     Rule{"es", ""},
      Rule{"ly", ""},         Rule{"e", ""},      Rule{"s", ""},
  };
  for (const auto& rule : kRules) {
    if (token.size() >= rule.suffix.size() + 3 && token.ends_with(rule.suffix)) {
      std::string out(token.substr(0, token.size() - rule.suffix.size()));
      out += rule.replacement;
      return out;
    }
  }
  return std::string(token);
}

namespace {

double meteor_single(const std::vector<std::string>& cand,
                     const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);

  auto align = [&](auto&& key) {
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cand_to_ref[i] >= 0) continue;
      const auto ck = key(cand[i]);
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (ref_used[j] || key(ref[j]) != ck) continue;
        cand_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
        break;
      }
    }
  };
  align([](const std::string& t) { return t; });
  align([](const std::string& t) { return stem(t); });

  std::size_t matches = 0, chunks = 0;
  int prev = -2;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] < 0) {
      prev = -2;
      continue;
    }
    ++matches;
    if (cand_to_ref[i] != prev + 1 || prev < 0) ++chunks;
    prev = cand_to_ref[i];
  }
  if (matches == 0) return 0.0;

  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(cand.size());
  const double recall = m / static_cast<double>(ref.size());
  const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double frag = static_cast<double>(chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

}  // namespace

double meteor_lite(std::string_view candidate,
                   std::span<const std::string> references) {
  const auto cand = tokenize(candidate);
  double best = 0.0;
  for (const auto& r : references)
    best = std::max(best, meteor_single(cand, tokenize(r)));
  return best;
}

// ---------------------------------------------------------------------------

double cosine_score(std::string_view candidate,
                    std::span<const std::string> references,
                    const EmbeddingProvider& provider) {
  if (references.empty()) return 0.0;
  const Embedding c = provider.embed(candidate);
  double best = -1.0;
  for (const auto& r : references)
    best = std::max(best, cosine(c, provider.embed(r)));
  return best;
}

std::string metric_text(const ElementRef& e) { return sentence(e.type, e.label); }

MetricSample score_recommendations(std::span<const ElementRef> recs,
                                   const GroundTruth& truth, std::size_t k,
                                   const EmbeddingProvider& provider) {
  MetricSample s;
  s.precision_at_k = precision_at_k(recs, truth, k);
  s.recall_at_k = recall_at_k(recs, truth, k);

  const auto top = recs.first(std::min(k, recs.size()));
  if (top.empty() || truth.elements.empty()) return s;

  std::vector<std::string> refs;
  refs.reserve(truth.elements.size());
  for (const auto& t : truth.elements) refs.push_back(metric_text(t));

  s.bleu = 0.0;
  s.meteor = 0.0;
  s.cosine = -1.0;
  for (const auto& r : top) {
    const std::string cand = metric_text(r);
    for (const auto& ref : refs) {
      std::span<const std::string> one(&ref, 1);
      s.bleu = std::max(s.bleu, bleu(cand, one));
      s.meteor = std::max(s.meteor, meteor_lite(cand, one));
    }
    s.cosine = std::max(s.cosine, cosine_score(cand, refs, provider));
  }
  return s;
}

Embedding CachedEmbedder::embed(std::string_view text) const {
  std::string key(text);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Embedding e = inner_.embed(text);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(e)).first->second;
}

}  // namespace procomplete
