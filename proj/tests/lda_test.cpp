#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "litmine/lda.hpp"
#include "support.hpp"

using namespace litmine;

namespace {

// K = 1, V = 2 model with a chosen term distribution, for constructing
// hand-checkable coherence and relevance cases.
TopicModel tiny_model(std::vector<double> phi, int K, int V) {
  TopicModel m;
  m.K = K;
  m.V = V;
  m.alpha = 1.0 / K;
  m.eta = 1.0 / K;
  m.phi = std::move(phi);
  return m;
}

DocTermCounts doc_of(std::initializer_list<std::pair<int, long long>> pairs) {
  DocTermCounts d;
  for (auto [w, c] : pairs) d.push_back({w, c});
  return d;
}

}  // namespace

TEST_SUITE("lda") {

TEST_CASE("planted disjoint topics are recovered") {
  auto planted = testutil::make_planted_lda(500, 3, 10, 60, 0.2, 777);
  auto result = train(planted.docs, planted.vocab, 3, 42, 1.0 / 3, 1.0 / 3);

  CHECK(result.converged);
  CHECK(result.skipped_docs.empty());

  // the bound never decreases across outer iterations
  for (std::size_t i = 1; i < result.elbo_trace.size(); ++i)
    CHECK(result.elbo_trace[i] >=
          result.elbo_trace[i - 1] - 1e-9 * std::abs(result.elbo_trace[i - 1]));

  // each topic row is a distribution
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int w = 0; w < planted.V; ++w) {
      CHECK(result.model.phi_at(k, w) >= 0.0);
      s += result.model.phi_at(k, w);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
  }

  const double cosine = testutil::best_matched_min_cosine(
      result.model.phi, planted.true_phi, 3, planted.V);
  CHECK(cosine >= 0.97);
}

TEST_CASE("training is deterministic in the seed") {
  auto planted = testutil::make_planted_lda(120, 3, 6, 40, 0.3, 55);
  auto a = train(planted.docs, planted.vocab, 3, 9, 1.0 / 3, 1.0 / 3);
  auto b = train(planted.docs, planted.vocab, 3, 9, 1.0 / 3, 1.0 / 3);
  CHECK(a.model.phi == b.model.phi);
  CHECK(a.elbo_trace == b.elbo_trace);

  auto c = train(planted.docs, planted.vocab, 3, 10, 1.0 / 3, 1.0 / 3);
  CHECK(a.model.phi != c.model.phi);
}

TEST_CASE("documents without vocabulary terms are skipped without side effects") {
  auto planted = testutil::make_planted_lda(80, 2, 5, 30, 0.5, 21);
  auto with_all = train(planted.docs, planted.vocab, 2, 3, 0.5, 0.5);

  auto docs = planted.docs;
  docs.insert(docs.begin() + 10, DocTermCounts{});
  docs.push_back(DocTermCounts{});
  auto with_empty = train(docs, planted.vocab, 2, 3, 0.5, 0.5);

  CHECK(with_empty.skipped_docs == std::vector<std::size_t>{10, docs.size() - 1});
  CHECK(with_empty.model.phi == with_all.model.phi);
}

TEST_CASE("degenerate training inputs throw") {
  auto planted = testutil::make_planted_lda(10, 2, 4, 20, 0.5, 5);
  CHECK_THROWS_AS(train(planted.docs, planted.vocab, 1, 0, 0.5, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(train(planted.docs, planted.vocab, 11, 0, 0.5, 0.5),
                  std::runtime_error);
  std::vector<DocTermCounts> empties(4);
  CHECK_THROWS_AS(train(empties, planted.vocab, 2, 0, 0.5, 0.5), std::runtime_error);
}

TEST_CASE("inference concentrates on the generating topic") {
  auto planted = testutil::make_planted_lda(300, 3, 8, 50, 0.2, 101);
  auto result = train(planted.docs, planted.vocab, 3, 7, 1.0 / 3, 1.0 / 3);

  // a document using only topic block 1 words
  auto probe = doc_of({{8, 10}, {9, 10}, {10, 10}});
  auto inf = infer(result.model, "probe", probe);
  CHECK(inf.theta.size() == 3);
  double total = 0.0;
  for (double t : inf.theta) total += t;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_FALSE(inf.no_vocab_terms);

  // find which learned topic carries block 1 and expect dominance there
  int best_k = 0;
  double best_mass = -1.0;
  for (int k = 0; k < 3; ++k) {
    double mass = 0.0;
    for (int w = 8; w < 16; ++w) mass += result.model.phi_at(k, w);
    if (mass > best_mass) {
      best_mass = mass;
      best_k = k;
    }
  }
  CHECK(inf.theta[best_k] >= 0.5);
}

TEST_CASE("inference without vocabulary terms is exactly uniform and flagged") {
  auto planted = testutil::make_planted_lda(60, 3, 5, 30, 0.4, 33);
  auto result = train(planted.docs, planted.vocab, 3, 2, 1.0 / 3, 1.0 / 3);
  auto inf = infer(result.model, "empty", {});
  CHECK(inf.no_vocab_terms);
  REQUIRE(inf.theta.size() == 3);
  for (double t : inf.theta) CHECK(t == 1.0 / 3);
}

TEST_CASE("inference is reproducible") {
  auto planted = testutil::make_planted_lda(100, 2, 6, 40, 0.3, 71);
  auto result = train(planted.docs, planted.vocab, 2, 1, 0.5, 0.5);
  auto a = infer(result.model, "d", planted.docs[0]);
  auto b = infer(result.model, "d", planted.docs[0]);
  CHECK(a.theta == b.theta);
}

TEST_CASE("coherence of a co-occurring pair is zero") {
  // two documents: term 0 in both, term 1 in one of them; one pair
  // contributes log((1 + 1) / 2) = 0
  auto model = tiny_model({0.7, 0.3}, 1, 2);
  std::vector<DocTermCounts> docs{doc_of({{0, 1}, {1, 1}}), doc_of({{0, 2}})};
  auto res = umass_coherence(model, docs, 2);
  REQUIRE(res.per_topic.size() == 1);
  CHECK(res.per_topic[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coherence of never co-occurring terms is a negative log ratio") {
  // term 0 in four documents, term 1 in one other: log((0 + 1) / 4)
  auto model = tiny_model({0.7, 0.3}, 1, 2);
  std::vector<DocTermCounts> docs{doc_of({{0, 1}}), doc_of({{0, 1}}),
                                  doc_of({{0, 1}}), doc_of({{0, 1}}),
                                  doc_of({{1, 1}})};
  auto res = umass_coherence(model, docs, 2);
  CHECK(res.per_topic[0] == doctest::Approx(std::log(0.25)).epsilon(1e-12));
}

TEST_CASE("coherence denominator follows the more probable term") {
  // same corpus, reversed probabilities: the conditioning term flips
  std::vector<DocTermCounts> docs{doc_of({{0, 1}, {1, 1}}), doc_of({{0, 2}})};
  auto fwd = umass_coherence(tiny_model({0.7, 0.3}, 1, 2), docs, 2);
  auto rev = umass_coherence(tiny_model({0.3, 0.7}, 1, 2), docs, 2);
  // forward: log((1+1)/D(term0)) = log(2/2); reversed: log((1+1)/D(term1))
  CHECK(fwd.per_topic[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rev.per_topic[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("identical topics have identical coherence") {
  TopicModel m = tiny_model({0.5, 0.3, 0.2, 0.5, 0.3, 0.2}, 2, 3);
  std::vector<DocTermCounts> docs{doc_of({{0, 1}, {1, 1}}), doc_of({{1, 1}, {2, 1}}),
                                  doc_of({{0, 1}, {2, 1}})};
  auto res = umass_coherence(m, docs, 3);
  CHECK(res.per_topic[0] == res.per_topic[1]);
  CHECK(res.mean == doctest::Approx(res.per_topic[0]).epsilon(1e-15));
}

TEST_CASE("an absent conditioning term is an error, an absent rarer term is not") {
  std::vector<DocTermCounts> docs{doc_of({{0, 3}})};  // term 1 never appears
  // term 1 is the more probable one, so it lands in the denominator
  CHECK_THROWS_AS(umass_coherence(tiny_model({0.4, 0.6}, 1, 2), docs, 2),
                  std::runtime_error);
  // flipped, term 1 only enters the smoothed numerator: log((0+1)/1)
  auto res = umass_coherence(tiny_model({0.6, 0.4}, 1, 2), docs, 2);
  CHECK(res.per_topic[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("k selection returns the grid entry with the best mean coherence") {
  auto planted = testutil::make_planted_lda(200, 3, 6, 50, 0.2, 404);
  auto sel = select_k(planted.docs, planted.vocab, {2, 3, 6}, 11, 0.2, 0.2, {}, 5);
  REQUIRE(sel.curve.size() == 3);
  CHECK(sel.curve[0].first == 2);
  CHECK(sel.curve[1].first == 3);
  CHECK(sel.curve[2].first == 6);
  // the reported best is consistent with the curve and the smaller-K tie rule
  double best = sel.curve[0].second;
  for (const auto& [K, c] : sel.curve) best = std::max(best, c);
  bool seen_best_first = false;
  for (const auto& [K, c] : sel.curve) {
    if (c == best) {
      CHECK(sel.best_K == K);
      seen_best_first = true;
      break;
    }
  }
  CHECK(seen_best_first);

  auto single = select_k(planted.docs, planted.vocab, {4}, 11, 0.25, 0.25, {}, 5);
  CHECK(single.best_K == 4);
  CHECK_THROWS_AS(select_k(planted.docs, planted.vocab, {}, 0, 0.2, 0.2),
                  std::invalid_argument);
}

TEST_CASE("corpus term probabilities are count fractions") {
  std::vector<DocTermCounts> docs{doc_of({{0, 3}, {1, 1}}), doc_of({{0, 1}, {2, 3}})};
  auto probs = corpus_term_probs(docs, 4);
  REQUIRE(probs.size() == 4);
  CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(probs[1] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(probs[2] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(probs[3] == 0.0);
}

TEST_CASE("relevance blends topic probability against corpus lift") {
  auto model = tiny_model({0.1, 0.9}, 1, 2);
  std::vector<double> probs{0.01, 0.99};
  auto rel = term_relevance(model, probs, 0.6);
  // 0.6 log 0.1 + 0.4 log 10
  CHECK(rel[0] == doctest::Approx(-0.4605170185988091).epsilon(1e-12));
  CHECK(rel[1] == doctest::Approx(-0.10134038131642574).epsilon(1e-12));

  auto pure_prob = term_relevance(model, probs, 1.0);
  CHECK(pure_prob[0] == doctest::Approx(std::log(0.1)).epsilon(1e-12));
  auto pure_lift = term_relevance(model, probs, 0.0);
  CHECK(pure_lift[0] == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  // zero probabilities are floored instead of producing infinities
  auto floored = term_relevance(tiny_model({0.0, 1.0}, 1, 2), {0.0, 1.0}, 0.6);
  CHECK(std::isfinite(floored[0]));

  CHECK_THROWS_AS(term_relevance(model, probs, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(term_relevance(model, {0.5}, 0.6), std::invalid_argument);
}

TEST_CASE("strong terms keep the threshold value and sort by relevance then index") {
  std::vector<double> rel{-2.5, -1.0, -2.51, -1.0};
  auto lists = strong_terms(rel, 1, 4, -2.5);
  REQUIRE(lists.size() == 1);
  REQUIRE(lists[0].size() == 3);
  CHECK(lists[0][0] == std::pair<int, double>(1, -1.0));
  CHECK(lists[0][1] == std::pair<int, double>(3, -1.0));
  CHECK(lists[0][2] == std::pair<int, double>(0, -2.5));

  auto none = strong_terms({-3.0, -4.0}, 1, 2, -2.5);
  CHECK(none[0].empty());
}

TEST_CASE("strong documents keep the threshold value and sort descending") {
  std::vector<DocTopicInference> infs;
  for (auto [id, t0] : std::vector<std::pair<std::string, double>>{
           {"a", 0.50}, {"b", 0.49}, {"c", 0.80}, {"d", 0.65}}) {
    DocTopicInference inf;
    inf.doc_id = id;
    inf.theta = {t0, 1.0 - t0};
    infs.push_back(inf);
  }
  auto docs = strong_docs(infs, 0, 0.5);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].first == "c");
  CHECK(docs[1].first == "d");
  CHECK(docs[2].first == "a");

  auto other_side = strong_docs(infs, 1, 0.5);
  REQUIRE(other_side.size() == 2);
  CHECK(other_side[0].first == "b");
}

TEST_CASE("topic summaries tie terms and documents to names") {
  auto planted = testutil::make_planted_lda(100, 2, 4, 30, 0.3, 17);
  auto result = train(planted.docs, planted.vocab, 2, 5, 0.5, 0.5);
  auto probs = corpus_term_probs(planted.docs, planted.V);
  auto rel = term_relevance(result.model, probs, 0.6);
  std::vector<DocTopicInference> infs;
  for (std::size_t d = 0; d < 20; ++d)
    infs.push_back(infer(result.model, "d" + std::to_string(d), planted.docs[d]));
  auto summaries = summarize_topics(result.model, rel, infs, planted.vocab);
  REQUIRE(summaries.size() == 2);
  for (const auto& s : summaries) {
    CHECK_FALSE(s.label.has_value());
    for (const auto& [phrase, r] : s.strong_terms)
      CHECK(planted.vocab.index_of(phrase) >= 0);
    for (const auto& [doc_id, t] : s.strong_docs) CHECK(t >= 0.5);
  }
}

TEST_CASE("model files round trip exactly") {
  auto planted = testutil::make_planted_lda(60, 2, 5, 25, 0.4, 9);
  auto result = train(planted.docs, planted.vocab, 2, 77, 0.5, 0.5);
  testutil::TempDir dir("model");
  write_model_json(result.model, dir.path() / "model.json");
  auto loaded = read_model_json(dir.path() / "model.json");
  CHECK(loaded.K == result.model.K);
  CHECK(loaded.V == result.model.V);
  CHECK(loaded.alpha == result.model.alpha);
  CHECK(loaded.eta == result.model.eta);
  CHECK(loaded.seed == result.model.seed);
  CHECK(loaded.vocab_hash == result.model.vocab_hash);
  CHECK(loaded.phi == result.model.phi);
}

TEST_CASE("inference files round trip exactly") {
  std::vector<DocTopicInference> infs;
  DocTopicInference a;
  a.doc_id = "paper one";
  a.theta = {0.125, 0.375, 0.5};
  DocTopicInference b;
  b.doc_id = "paper,two";  // comma requires csv quoting
  b.theta = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  infs = {a, b};
  testutil::TempDir dir("inf");
  write_inference_csv(infs, dir.path() / "inference.csv");
  auto loaded = read_inference_csv(dir.path() / "inference.csv");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].doc_id == "paper one");
  CHECK(loaded[1].doc_id == "paper,two");
  CHECK(loaded[0].theta == a.theta);
  CHECK(loaded[1].theta == b.theta);
}

}  // TEST_SUITE
