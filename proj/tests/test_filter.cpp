#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

#include "btk/aligner.hpp"
#include "btk/filter.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace btk;
using namespace btk::testing;
using nlohmann::json;

namespace {

Corpus scored_corpus(const std::vector<double>& scores) {
  Corpus c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    SentencePair p;
    p.en = {"en " + std::to_string(i), Lang::en};
    p.vi = {"vi " + std::to_string(i), Lang::vi};
    p.score = scores[i];
    c.pairs.push_back(std::move(p));
  }
  return c;
}

std::vector<std::size_t> indices_of(const Corpus& selected, const Corpus& original) {
  std::vector<std::size_t> out;
  std::size_t cursor = 0;
  for (const SentencePair& pair : selected.pairs) {
    while (cursor < original.size() && original.pairs[cursor].en.text != pair.en.text) ++cursor;
    REQUIRE(cursor < original.size());
    out.push_back(cursor);
    ++cursor;
  }
  return out;
}

// Loss endpoint: loss = vi text length; optional failure injection.
class ScoreServer {
 public:
  explicit ScoreServer(int fail_after_batches = -1) : fail_after_(fail_after_batches) {
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      const int batch_index = batches_.fetch_add(1);
      if (fail_after_ >= 0 && batch_index >= fail_after_) {
        res.status = 500;
        return;
      }
      const json body = json::parse(req.body);
      std::vector<double> losses;
      for (const auto& pair : body["pairs"]) {
        losses.push_back(static_cast<double>(pair["vi"].get<std::string>().size()));
        pairs_seen_++;
      }
      res.set_content(json{{"losses", losses}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScoreServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int batches() const { return batches_.load(); }
  int pairs_seen() const { return pairs_seen_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> batches_{0};
  std::atomic<int> pairs_seen_{0};
  int fail_after_ = -1;
};

}  // namespace

TEST_CASE("select_top_k picks the best in original order") {
  const Corpus c = scored_corpus({3, 1, 2});
  const Corpus top = select_top_k(c, 2, /*higher_is_better=*/true);
  REQUIRE(top.size() == 2);
  CHECK(*top.pairs[0].score == 3);
  CHECK(*top.pairs[1].score == 2);
  CHECK(top.pairs[0].en.text == "en 0");  // original relative order
}

TEST_CASE("select_top_k with k equal to size is the identity") {
  const Corpus c = scored_corpus({5, 4, 9, 9});
  const Corpus top = select_top_k(c, 4, true);
  REQUIRE(top.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same_pair(top.pairs[i], c.pairs[i]));
}

TEST_CASE("ties break by original position for losses too") {
  const Corpus c = scored_corpus({0.5, 0.5, 0.9});
  const Corpus top = select_top_k(c, 2, /*higher_is_better=*/false);
  REQUIRE(top.size() == 2);
  CHECK(top.pairs[0].en.text == "en 0");
  CHECK(top.pairs[1].en.text == "en 1");
}

TEST_CASE("select_top_k validates inputs") {
  Corpus c = scored_corpus({1, 2});
  CHECK_THROWS_AS(select_top_k(c, 3, true), FilterError);
  c.pairs[1].score.reset();
  try {
    select_top_k(c, 1, true);
    FAIL("expected FilterError");
  } catch (const FilterError& e) {
    CHECK(std::string(e.what()).find("pair 1") != std::string::npos);
  }
  CHECK(select_top_k(Corpus{}, 0, true).size() == 0);
}

TEST_CASE("property: equals the stable-sort-prefix oracle, heavy ties included") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = bounded_rand(rng, 400);
    std::vector<double> scores(n);
    const bool heavy_ties = bounded_rand(rng, 2) == 0;
    for (double& s : scores) {
      s = heavy_ties ? static_cast<double>(bounded_rand(rng, 4))
                     : static_cast<double>(bounded_rand(rng, 1000000)) / 7.0;
    }
    const bool higher = bounded_rand(rng, 2) == 0;
    const std::size_t k = bounded_rand(rng, n + 1);
    const Corpus c = scored_corpus(scores);
    const Corpus top = select_top_k(c, k, higher);
    const auto got = indices_of(top, c);
    const auto want = oracle_top_k_indices(scores, k, higher);
    REQUIRE(got == want);
  }
}

TEST_CASE("selection is monotone and idempotent") {
  std::mt19937_64 rng(7);
  std::vector<double> scores(200);
  for (double& s : scores) s = static_cast<double>(bounded_rand(rng, 10));
  const Corpus c = scored_corpus(scores);
  for (std::size_t k = 0; k + 1 < 20; ++k) {
    const auto a = indices_of(select_top_k(c, k, true), c);
    const auto b = indices_of(select_top_k(c, k + 1, true), c);
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
  const Corpus once = select_top_k(c, 50, true);
  const Corpus twice = select_top_k(once, 50, true);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(same_pair(once.pairs[i], twice.pairs[i]));
}

TEST_CASE("roundtrip scorer equals pair_score over the corpus") {
  auto lex = std::make_shared<LexiconTranslator>(
      std::vector<std::pair<std::string, std::string>>{{"one", "một"}, {"two", "hai"}});
  auto cache = std::make_shared<TranslationCache>();
  auto translator = std::make_shared<CachedTranslator>(lex, cache);

  Corpus c;
  c.pairs = {[] {
               SentencePair p;
               p.en = {"one two", Lang::en};
               p.vi = {"một hai", Lang::vi};
               return p;
             }(),
             [] {
               SentencePair p;
               p.en = {"one one", Lang::en};
               p.vi = {"hai hai", Lang::vi};
               return p;
             }()};
  RoundtripScorer scorer{translator, {}};
  const ScorerSpec spec = ScorerSpec::roundtrip_bleu(scorer);
  CHECK(spec.higher_is_better);
  const Corpus scored = score_corpus(c, spec);
  REQUIRE(scored.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const double direct = pair_score(c.pairs[i].en, c.pairs[i].vi, *translator, {});
    CHECK(*scored.pairs[i].score == direct);
  }
  CHECK(*scored.pairs[0].score == doctest::Approx(200.0));
}

TEST_CASE("roundtrip scorer on identity text gives 200 everywhere") {
  auto translator = std::make_shared<CachedTranslator>(std::make_shared<IdentityTranslator>(),
                                                       std::make_shared<TranslationCache>());
  Corpus c;
  for (int i = 0; i < 5; ++i) {
    SentencePair p;
    p.en = {"same text " + std::to_string(i), Lang::en};
    p.vi = {"same text " + std::to_string(i), Lang::vi};
    c.pairs.push_back(std::move(p));
  }
  const Corpus scored = score_corpus(c, ScorerSpec::roundtrip_bleu({translator, {}}));
  for (const auto& pair : scored.pairs) CHECK(*pair.score == doctest::Approx(200.0));
}

TEST_CASE("remote loss scorer attaches losses in order") {
  ScoreServer server;
  RemoteLossScorer remote;
  remote.endpoint = server.endpoint();
  remote.batch = 2;
  remote.backoff_ms = 1;
  const ScorerSpec spec = ScorerSpec::remote_loss(remote);
  CHECK_FALSE(spec.higher_is_better);

  Corpus c;
  for (int i = 0; i < 5; ++i) {
    SentencePair p;
    p.en = {"e" + std::to_string(i), Lang::en};
    p.vi = {std::string(static_cast<std::size_t>(i + 1), 'v'), Lang::vi};
    c.pairs.push_back(std::move(p));
  }
  const Corpus scored = score_corpus(c, spec);
  for (int i = 0; i < 5; ++i) CHECK(*scored.pairs[i].score == doctest::Approx(i + 1.0));
  CHECK(server.batches() == 3);  // 2 + 2 + 1
}

TEST_CASE("remote loss failures are resumable through the checkpoint") {
  TempDir dir;
  const std::string checkpoint = dir.file("scores.ckpt");
  Corpus c;
  for (int i = 0; i < 6; ++i) {
    SentencePair p;
    p.en = {"e" + std::to_string(i), Lang::en};
    p.vi = {std::string(static_cast<std::size_t>(i + 1), 'v'), Lang::vi};
    c.pairs.push_back(std::move(p));
  }
  {
    ScoreServer flaky(/*fail_after_batches=*/1);
    RemoteLossScorer remote;
    remote.endpoint = flaky.endpoint();
    remote.batch = 2;
    remote.retries = 0;
    remote.backoff_ms = 1;
    ScoreOptions options;
    options.checkpoint_path = checkpoint;
    CHECK_THROWS(score_corpus(c, ScorerSpec::remote_loss(remote), options));
    CHECK(flaky.pairs_seen() == 2);  // first batch landed before the failure
  }
  {
    ScoreServer healthy;
    RemoteLossScorer remote;
    remote.endpoint = healthy.endpoint();
    remote.batch = 2;
    remote.backoff_ms = 1;
    ScoreOptions options;
    options.checkpoint_path = checkpoint;
    const Corpus scored = score_corpus(c, ScorerSpec::remote_loss(remote), options);
    for (int i = 0; i < 6; ++i) CHECK(*scored.pairs[i].score == doctest::Approx(i + 1.0));
    CHECK(healthy.pairs_seen() == 4);  // the checkpointed batch is skipped
  }
}

TEST_CASE("tune_k picks the argmax with small-k tie preference") {
  const Corpus c = scored_corpus({9, 8, 7, 6, 5, 4, 3, 2, 1, 0});
  int calls = 0;
  SUBCASE("synthetic -|k - 5|") {
    const Evaluator eval = [&](const Corpus& candidate) {
      ++calls;
      return -std::abs(static_cast<double>(candidate.size()) - 5.0);
    };
    const FilterReport report = tune_k(c, {3, 5, 7}, eval, true);
    CHECK(report.chosen_k == 5);
    CHECK(calls == 3);
    CHECK(report.metric_per_k == std::vector<double>{-2, 0, -2});
    CHECK(*report.threshold_score == 5);  // score of the 5th best
  }
  SUBCASE("constant metric prefers the smaller k") {
    const Evaluator eval = [&](const Corpus&) {
      ++calls;
      return 1.0;
    };
    const FilterReport report = tune_k(c, {4, 2}, eval, true);
    CHECK(report.chosen_k == 2);
  }
  SUBCASE("single candidate means a single call") {
    const Evaluator eval = [&](const Corpus&) {
      ++calls;
      return 42.0;
    };
    const FilterReport report = tune_k(c, {7}, eval, true);
    CHECK(report.chosen_k == 7);
    CHECK(calls == 1);
  }
}

TEST_CASE("tune_k failure carries the partial report") {
  const Corpus c = scored_corpus({3, 2, 1});
  const Evaluator eval = [](const Corpus& candidate) -> double {
    if (candidate.size() >= 2) throw std::runtime_error("boom");
    return 1.0;
  };
  try {
    tune_k(c, {1, 2, 3}, eval, true);
    FAIL("expected TuneError");
  } catch (const TuneError& e) {
    CHECK(e.partial.k_candidates == std::vector<std::size_t>{1});
    CHECK(e.partial.metric_per_k == std::vector<double>{1.0});
    CHECK(std::string(e.what()).find("k = 2") != std::string::npos);
  }
  CHECK_THROWS_AS(tune_k(c, {}, [](const Corpus&) { return 0.0; }, true), FilterError);
  CHECK_THROWS_AS(tune_k(c, {9}, [](const Corpus&) { return 0.0; }, true), FilterError);
}

TEST_CASE("filter report serializes cleanly") {
  FilterReport report;
  report.k_candidates = {2, 4};
  report.metric_per_k = {0.5, 0.25};
  report.chosen_k = 2;
  report.threshold_score = 7.5;
  const auto j = report.to_json();
  CHECK(j["chosen_k"] == 2);
  CHECK(j["metric_per_k"][1] == 0.25);
  CHECK(j["threshold_score"] == 7.5);
}
