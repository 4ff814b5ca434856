#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "procomplete/error.hpp"
#include "procomplete/recommender.hpp"
#include "procomplete/synthetic.hpp"

using namespace procomplete;

namespace {

std::set<std::string> labels(const std::vector<Recommendation>& recs) {
  std::set<std::string> out;
  for (const auto& r : recs) out.insert(r.label.value_or(""));
  return out;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

RecommendationQuery query(const ProcessGraph& g, std::string target,
                          std::size_t k = 3) {
  RecommendationQuery q;
  q.graph = &g;
  q.target_node = std::move(target);
  q.k = k;
  return q;
}

}  // namespace

TEST_CASE("A/B corpus index contents") {
  const HashEmbedder h;
  const auto corpus = fixtures::ab_corpus();
  const auto index = build_index(corpus, 3, h, GraphMode::WithGateways, "t0");
  REQUIRE(index.size() == 4);
  CHECK(index.meta().slice_length == 3);
  CHECK(index.meta().created_at == "t0");
  CHECK(index.records()[0].node_ids == std::vector<std::string>{"x", "y", "z"});
  CHECK(index.records()[0].process_id == "A");
  REQUIRE(index.records()[0].next.size() == 1);
  CHECK(index.records()[0].next[0].node_id == "a");
  CHECK(index.records()[1].node_ids == std::vector<std::string>{"y", "z", "a"});
  CHECK(index.records()[1].next.empty());
  CHECK(index.records()[2].process_id == "B");
  CHECK(index.records()[2].next[0].node_id == "b");
  CHECK(index.records()[3].node_ids == std::vector<std::string>{"y", "z", "b"});
  for (std::size_t i = 0; i < index.size(); ++i)
    CHECK(index.embeddings()[i] == h.embed(index.records()[i].slice_text));
}

TEST_CASE("A/B scenario recommends both a and b") {
  const HashEmbedder h;
  const auto corpus = fixtures::ab_corpus();
  const auto index = build_index(corpus, 3, h, GraphMode::WithGateways);
  const auto c = fixtures::query_c();
  const auto recs = recommend(query(c, "z"), index, h);
  REQUIRE(recs.size() == 2);
  CHECK(labels(recs) == std::set<std::string>{"a", "b"});
  CHECK(recs[0].label == std::optional<std::string>("a"));
  for (const auto& r : recs) {
    CHECK(r.score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.explanation.matched_slice_text == "Task: x. Task: y. Task: z.");
    CHECK(r.explanation.query_slice_text == "Task: x. Task: y. Task: z.");
    CHECK(r.explanation.similarity == r.score);
  }
  CHECK(recs[0].explanation.source_process_id == "A");
  CHECK(recs[1].explanation.source_process_id == "B");

  // Same label and type from two processes shows up once.
  const std::vector<ProcessGraph> twice{fixtures::chain_process("A", {"x", "y", "z", "a"}),
                                        fixtures::chain_process("A2", {"x", "y", "z", "a"})};
  const auto dup = recommend(query(c, "z"), build_index(twice, 3, h, GraphMode::WithGateways), h);
  REQUIRE(dup.size() == 1);
  CHECK(dup[0].explanation.source_process_id == "A");
}

TEST_CASE("match with several next elements yields one recommendation each") {
  const HashEmbedder h;
  const std::vector<ProcessGraph> corpus{fixtures::admission()};
  const auto index = build_index(corpus, 3, h, GraphMode::WithGateways);
  const auto g = fixtures::admission();
  const auto recs = recommend(query(g, "split"), index, h);
  REQUIRE(recs.size() >= 2);
  CHECK(*recs[0].label == "Invite to an aptitude test");
  CHECK(*recs[1].label == "Keep in the applicant pool");
  CHECK(recs[0].score == recs[1].score);
  CHECK(recs[0].score == doctest::Approx(1.0));
}

TEST_CASE("tasks-only mode contracts gateways") {
  const HashEmbedder h;
  const std::vector<ProcessGraph> corpus{fixtures::admission()};
  const auto index = build_index(corpus, 3, h, GraphMode::TasksOnly);
  for (const auto& r : index.records())
    for (const auto& n : r.next) CHECK_FALSE(n.type.is_gateway());
  const auto g = fixtures::admission();
  auto q = query(g, "evaluate");
  q.mode = GraphMode::TasksOnly;
  const auto recs = recommend(q, index, h);
  REQUIRE(recs.size() >= 2);
  CHECK(labels({recs.begin(), recs.begin() + 2}) ==
        std::set<std::string>{"Invite to an aptitude test", "Keep in the applicant pool"});
  auto gw = query(g, "split");
  gw.mode = GraphMode::TasksOnly;
  CHECK(code_of([&] { recommend(gw, index, h); }) == ErrorCode::UnknownNode);
}

TEST_CASE("recommend errors") {
  const HashEmbedder h;
  const auto corpus = fixtures::ab_corpus();
  const auto index = build_index(corpus, 3, h, GraphMode::WithGateways);
  const auto c = fixtures::query_c();
  CHECK(code_of([&] { recommend(query(c, "x"), index, h); }) ==
        ErrorCode::NoSliceEndsAtTarget);
  CHECK(code_of([&] { recommend(query(c, "ghost"), index, h); }) ==
        ErrorCode::UnknownNode);
  auto tasks = query(c, "z");
  tasks.mode = GraphMode::TasksOnly;
  CHECK(code_of([&] { recommend(tasks, index, h); }) == ErrorCode::ModeMismatch);
  const HashEmbedder narrow(64);
  CHECK(code_of([&] { recommend(query(c, "z"), index, narrow); }) ==
        ErrorCode::DescriptorMismatch);
  const std::vector<ProcessGraph> tiny{fixtures::chain_process("t", {"a", "b", "c"})};
  CHECK(code_of([&] { build_index(tiny, 5, h, GraphMode::WithGateways); }) ==
        ErrorCode::EmptyIndex);

  auto fb = query(c, "x");
  fb.fallback = true;
  const auto index2 = build_index(corpus, 2, h, GraphMode::WithGateways);
  CHECK_FALSE(recommend(fb, index2, h).empty());
}

TEST_CASE("exact textual match scores 1") {
  const HashEmbedder h;
  const auto g = fixtures::admission();
  const std::vector<ProcessGraph> corpus{g};
  const auto index = build_index(corpus, 3, h, GraphMode::WithGateways);
  const auto recs = recommend(query(g, "evaluate", 1), index, h);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].score == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(recs[0].type.kind() == ElementKind::ExclusiveGateway);
}

TEST_CASE("top match equals the brute-force argmax on random corpora") {
  const HashEmbedder h(128);
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    std::vector<ProcessGraph> corpus;
    for (std::uint64_t p = 0; p < 3; ++p)
      corpus.push_back(synthetic::workflow("w" + std::to_string(p),
                                           {7 + (seed + p) % 5, 0.4}, seed * 10 + p));
    const std::size_t n = 1 + seed % 3;
    const auto index = build_index(corpus, n, h, GraphMode::WithGateways);
    if (index.size() > 50) continue;
    const auto probe = synthetic::workflow("probe", {8, 0.4}, 5000 + seed);
    for (const auto& node : probe.nodes()) {
      const auto slices = extract_slices_ending_at(probe, node.id, n);
      if (slices.empty()) continue;
      double best = -2;
      std::set<std::pair<std::optional<std::string>, ElementType>> winners_next;
      for (std::size_t j = 0; j < index.size(); ++j) {
        if (index.records()[j].next.empty()) continue;
        double s = -2;
        for (const auto& sl : slices) {
          const auto e = h.embed(textualize(sl, probe));
          const std::vector<double> a(e.values().begin(), e.values().end());
          const auto& ev = index.embeddings()[j].values();
          s = std::max(s, oracles::loop_cosine(a, {ev.begin(), ev.end()}));
        }
        if (s > best + 1e-12) {
          best = s;
          winners_next.clear();
        }
        if (std::abs(s - best) <= 1e-12)
          for (const auto& nx : index.records()[j].next)
            winners_next.emplace(nx.label, nx.type);
      }
      const auto recs = recommend(query(probe, node.id, 3), index, h);
      REQUIRE_FALSE(recs.empty());
      CHECK(recs[0].score == doctest::Approx(best).epsilon(1e-9));
      CHECK(winners_next.count({recs[0].label, recs[0].type}) == 1);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("output invariants, filtering and determinism") {
  const HashEmbedder h;
  const auto corpus = synthetic::corpus(6, {15, 0.5}, 99);
  const auto index = build_index(corpus, 2, h, GraphMode::WithGateways);
  const auto probe = synthetic::workflow("probe", {15, 0.5}, 4242);
  std::size_t gateway_or_end_unfiltered = 0;
  for (const auto& node : probe.nodes()) {
    for (bool filtered : {false, true}) {
      for (std::size_t k : {1u, 3u, 5u}) {
        auto q = query(probe, node.id, k);
        q.filtered = filtered;
        std::vector<Recommendation> recs;
        try {
          recs = recommend(q, index, h);
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::NoSliceEndsAtTarget);
          continue;
        }
        CHECK(recs.size() <= k);
        std::set<std::pair<std::optional<std::string>, ElementType>> seen;
        for (std::size_t i = 0; i < recs.size(); ++i) {
          if (i > 0) CHECK(recs[i].score <= recs[i - 1].score);
          CHECK(seen.emplace(recs[i].label, recs[i].type).second);
          CHECK(recs[i].score >= -1.0 - 1e-9);
          CHECK(recs[i].score <= 1.0 + 1e-9);
          if (filtered) CHECK_FALSE(excluded_when_filtered(recs[i].type));
          else if (excluded_when_filtered(recs[i].type)) ++gateway_or_end_unfiltered;
        }
        const auto again = recommend(q, index, h);
        REQUIRE(again.size() == recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
          CHECK(again[i].label == recs[i].label);
          CHECK(again[i].type == recs[i].type);
          CHECK(again[i].score == recs[i].score);
          CHECK(again[i].explanation.record == recs[i].explanation.record);
        }
      }
    }
  }
  CHECK(gateway_or_end_unfiltered > 0);
}
