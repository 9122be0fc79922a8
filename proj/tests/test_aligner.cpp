#include <doctest.h>

#include <random>
#include <set>

#include "btk/aligner.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace btk;
using namespace btk::testing;

namespace {

std::shared_ptr<CachedTranslator> identity_cached() {
  return std::make_shared<CachedTranslator>(std::make_shared<IdentityTranslator>(),
                                            std::make_shared<TranslationCache>());
}

Document doc_of(Lang lang, const std::vector<std::string>& lines) {
  Document doc;
  doc.lang = lang;
  doc.source_id = "test";
  for (const std::string& line : lines) doc.append({line, lang});
  return doc;
}

DocumentPair pair_of(const std::vector<std::string>& en, const std::vector<std::string>& vi,
                     const std::string& id = "p") {
  return DocumentPair(doc_of(Lang::en, en), doc_of(Lang::vi, vi), id);
}

// Structural checks every alignment result must satisfy.
void check_result_invariants(const AlignmentResult& result, std::size_t M, std::size_t N,
                             double tau,
                             const std::function<double(std::size_t, std::size_t)>& score) {
  double total = 0.0;
  std::set<std::size_t> used_en, used_vi;
  std::size_t prev_en = 0, prev_vi = 0;
  bool first = true;
  for (const Match& m : result.matches) {
    if (!first) {
      REQUIRE(m.en_index > prev_en);
      REQUIRE(m.vi_index > prev_vi);
    }
    first = false;
    prev_en = m.en_index;
    prev_vi = m.vi_index;
    REQUIRE(m.en_index < M);
    REQUIRE(m.vi_index < N);
    REQUIRE(m.score >= tau);
    REQUIRE(m.score == score(m.en_index, m.vi_index));
    total += m.score;
    used_en.insert(m.en_index);
    used_vi.insert(m.vi_index);
  }
  REQUIRE(total == doctest::Approx(result.total_score).epsilon(1e-12));
  for (std::size_t i : result.skipped_en) used_en.insert(i);
  for (std::size_t i : result.skipped_vi) used_vi.insert(i);
  REQUIRE(used_en.size() == M);
  REQUIRE(used_vi.size() == N);
  REQUIRE(result.matches.size() + result.skipped_en.size() == M);
  REQUIRE(result.matches.size() + result.skipped_vi.size() == N);
}

}  // namespace

TEST_CASE("pair_score doubles the identity BLEU") {
  auto translator = identity_cached();
  const Sentence e{"a b c", Lang::en};
  const Sentence v{"a b c", Lang::vi};
  CHECK(pair_score(e, v, *translator, {}) == doctest::Approx(200.0).epsilon(1e-9));
}

TEST_CASE("pair_score through a hand lexicon is exact both ways") {
  auto lex = std::make_shared<LexiconTranslator>(
      std::vector<std::pair<std::string, std::string>>{{"cat", "mèo"}, {"sat", "ngồi"}});
  CachedTranslator translator(lex, std::make_shared<TranslationCache>());
  BleuConfig unigram;
  unigram.max_n = 1;
  const Sentence e{"cat sat", Lang::en};
  const Sentence v{"mèo ngồi", Lang::vi};
  CHECK(pair_score(e, v, translator, unigram) == doctest::Approx(200.0).epsilon(1e-9));
}

TEST_CASE("pair_score of disjoint vocabulary is 0 without smoothing") {
  auto lex = std::make_shared<LexiconTranslator>(
      std::vector<std::pair<std::string, std::string>>{});
  CachedTranslator translator(lex, std::make_shared<TranslationCache>());
  BleuConfig config;
  config.smoothing = Smoothing::none();
  const Sentence e{"aa bb", Lang::en};
  const Sentence v{"xx yy", Lang::vi};
  CHECK(pair_score(e, v, translator, config) == 0.0);
}

TEST_CASE("identical documents align on the diagonal") {
  auto translator = identity_cached();
  const auto pair = pair_of({"a a", "b b", "c c"}, {"a a", "b b", "c c"});
  const AlignmentResult result = align_documents(pair, *translator, {});
  REQUIRE(result.matches.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(result.matches[i].en_index == i);
    CHECK(result.matches[i].vi_index == i);
    CHECK(result.matches[i].score == doctest::Approx(200.0));
  }
  CHECK(result.skipped_en.empty());
  CHECK(result.skipped_vi.empty());
  CHECK(result.total_score == doctest::Approx(600.0).epsilon(1e-9));
}

TEST_CASE("an untranslatable header is stripped") {
  auto translator = identity_cached();
  const auto pair =
      pair_of({"zz qq ww", "a a", "b b", "c c"}, {"a a", "b b", "c c"}, "header");
  const AlignmentResult result = align_documents(pair, *translator, {});
  REQUIRE(result.matches.size() == 3);
  CHECK(result.matches[0].en_index == 1);
  CHECK(result.matches[0].vi_index == 0);
  CHECK(result.matches[2].en_index == 3);
  CHECK(result.matches[2].vi_index == 2);
  REQUIRE(result.skipped_en.size() == 1);
  CHECK(result.skipped_en[0] == 0);
  CHECK(result.skipped_vi.empty());
}

TEST_CASE("empty documents produce empty alignments") {
  auto translator = identity_cached();
  const DocumentPair pair(doc_of(Lang::en, {"a", "b"}), doc_of(Lang::vi, {}), "empty-vi");
  const AlignmentResult result = align_documents(pair, *translator, {});
  CHECK(result.matches.empty());
  CHECK(result.total_score == 0.0);
  CHECK(result.skipped_en == std::vector<std::size_t>{0, 1});
  CHECK(result.skipped_vi.empty());
}

TEST_CASE("document size limit guards the quadratic table") {
  auto translator = identity_cached();
  AlignConfig config;
  config.max_sentences = 2;
  const auto pair = pair_of({"a", "b", "c"}, {"a"});
  try {
    align_documents(pair, *translator, config);
    FAIL("expected AlignError");
  } catch (const AlignError& e) {
    CHECK(std::string(e.what()).find("pre-split") != std::string::npos);
  }
}

TEST_CASE("property: DP total equals exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  const double taus[] = {0.0, 5.0, 25.0, 80.0, 150.0, 201.0};
  for (int trial = 0; trial < 250; ++trial) {
    const std::size_t M = bounded_rand(rng, 8);
    const std::size_t N = bounded_rand(rng, 8);
    std::vector<std::vector<double>> s(M, std::vector<double>(N, 0.0));
    for (auto& row : s) {
      for (double& cell : row) cell = static_cast<double>(bounded_rand(rng, 201));
    }
    const double tau = taus[bounded_rand(rng, 6)];
    const auto score = [&](std::size_t i, std::size_t j) { return s[i][j]; };
    const AlignmentResult result = align_with_scores(M, N, score, tau);
    const double want = oracle_best_matching(s, tau);
    REQUIRE(result.total_score == want);  // integer-valued doubles: exact
    check_result_invariants(result, M, N, tau, score);
  }
}

TEST_CASE("zero-score matches are skipped, not emitted") {
  const auto zero = [](std::size_t, std::size_t) { return 0.0; };
  const AlignmentResult result = align_with_scores(3, 3, zero, 0.0);
  CHECK(result.matches.empty());
  CHECK(result.total_score == 0.0);
  CHECK(result.skipped_en.size() == 3);
  CHECK(result.skipped_vi.size() == 3);
}

TEST_CASE("tau zero with constant positive scores matches min(M,N)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t M = 1 + bounded_rand(rng, 7);
    const std::size_t N = 1 + bounded_rand(rng, 7);
    const double c = 1.0 + static_cast<double>(bounded_rand(rng, 100));
    const auto score = [&](std::size_t, std::size_t) { return c; };
    const AlignmentResult result = align_with_scores(M, N, score, 0.0);
    CHECK(result.matches.size() == std::min(M, N));
    CHECK(result.total_score == doctest::Approx(c * std::min(M, N)));
  }
}

TEST_CASE("tau above the maximum score yields zero matches") {
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> s(5, std::vector<double>(6));
  for (auto& row : s) {
    for (double& cell : row) cell = static_cast<double>(bounded_rand(rng, 200));
  }
  const auto score = [&](std::size_t i, std::size_t j) { return s[i][j]; };
  const AlignmentResult result = align_with_scores(5, 6, score, 200.5);
  CHECK(result.matches.empty());
  CHECK(result.total_score == 0.0);
}

TEST_CASE("property: transposing the instance transposes the matches") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t M = 1 + bounded_rand(rng, 6);
    const std::size_t N = 1 + bounded_rand(rng, 6);
    // real-valued scores make the optimum unique with probability 1
    std::vector<std::vector<double>> s(M, std::vector<double>(N));
    for (auto& row : s) {
      for (double& cell : row) {
        cell = static_cast<double>(rng()) / static_cast<double>(rng.max()) * 200.0;
      }
    }
    const double tau = 10.0;
    const auto score = [&](std::size_t i, std::size_t j) { return s[i][j]; };
    const auto score_t = [&](std::size_t j, std::size_t i) { return s[i][j]; };
    const AlignmentResult a = align_with_scores(M, N, score, tau);
    const AlignmentResult b = align_with_scores(N, M, score_t, tau);
    REQUIRE(a.total_score == b.total_score);
    REQUIRE(a.matches.size() == b.matches.size());
    for (std::size_t k = 0; k < a.matches.size(); ++k) {
      CHECK(a.matches[k].en_index == b.matches[k].vi_index);
      CHECK(a.matches[k].vi_index == b.matches[k].en_index);
    }
  }
}

TEST_CASE("band restriction keeps the diagonal reachable") {
  const auto score = [](std::size_t i, std::size_t j) { return i == j ? 100.0 : 60.0; };
  const AlignmentResult full = align_with_scores(5, 5, score, 10.0);
  const AlignmentResult banded = align_with_scores(5, 5, score, 10.0, 0);
  CHECK(full.total_score == banded.total_score);
  CHECK(banded.matches.size() == 5);
  // off-band matches are unavailable
  const auto off = [](std::size_t i, std::size_t j) { return i + 2 == j ? 100.0 : 0.0; };
  const AlignmentResult none = align_with_scores(4, 6, off, 10.0, 1);
  CHECK(none.matches.empty());
}

TEST_CASE("alignment issues at most M + N backend sentences") {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> en_lines, vi_lines;
  for (int i = 0; i < 50; ++i) {
    entries.emplace_back("word" + std::to_string(i), "từ" + std::to_string(i));
    en_lines.push_back("word" + std::to_string(i) + " word" + std::to_string((i + 1) % 50));
    vi_lines.push_back("từ" + std::to_string(i) + " từ" + std::to_string((i + 1) % 50));
  }
  auto lex = std::make_shared<LexiconTranslator>(entries);
  CachedTranslator translator(lex, std::make_shared<TranslationCache>());
  const auto pair = pair_of(en_lines, vi_lines, "bound");
  const AlignmentResult result = align_documents(pair, translator, {});
  CHECK(result.matches.size() == 50);
  CHECK(lex->sentences_translated() <= 100);
  CHECK(lex->sentences_translated() == 100);  // all sentences distinct
}

TEST_CASE("matches_to_corpus emits tier-3 scored pairs") {
  auto translator = identity_cached();
  auto pair = pair_of({"a a", "b b"}, {"a a", "b b"}, "doc7");
  pair.doc_en.domain = DomainTag::parse("news");
  const AlignmentResult result = align_documents(pair, *translator, {});
  const Corpus corpus = matches_to_corpus(pair, result);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.pairs[0].tier == 3);
  CHECK(corpus.pairs[0].source_id == "doc7");
  CHECK(corpus.pairs[0].domain.str() == "news");
  CHECK(corpus.pairs[0].score == doctest::Approx(200.0));
  CHECK(corpus.pairs[0].en.text == "a a");
  CHECK(corpus.pairs[0].vi.text == "a a");
}

TEST_CASE("align_batch is deterministic across worker counts and fail-soft") {
  // one document references a strict cache with no entries and must fail
  auto good_cache = std::make_shared<TranslationCache>();
  std::vector<DocumentPair> pairs;
  for (int d = 0; d < 12; ++d) {
    std::vector<std::string> en, vi;
    for (int i = 0; i < 6; ++i) {
      en.push_back("doc" + std::to_string(d) + " line line" + std::to_string(i));
      vi.push_back("doc" + std::to_string(d) + " line line" + std::to_string(i));
    }
    pairs.push_back(pair_of(en, vi, "doc" + std::to_string(d)));
  }
  auto run = [&](int workers) {
    CachedTranslator translator(std::make_shared<IdentityTranslator>(),
                                std::make_shared<TranslationCache>());
    return align_batch(pairs, translator, {}, workers);
  };
  const BatchResult r1 = run(1);
  const BatchResult r4 = run(4);
  REQUIRE(r1.outcomes.size() == r4.outcomes.size());
  for (std::size_t i = 0; i < r1.outcomes.size(); ++i) {
    REQUIRE(r1.outcomes[i].result.has_value());
    REQUIRE(r4.outcomes[i].result.has_value());
    CHECK(r1.outcomes[i].result->total_score == r4.outcomes[i].result->total_score);
    CHECK(r1.outcomes[i].result->matches.size() == r4.outcomes[i].result->matches.size());
  }
  CHECK(r1.report.documents == 12);
  CHECK(r1.report.failed == 0);
  CHECK(r1.report.match_rates.size() == 12);
  CHECK(r1.report.match_rates[0] == doctest::Approx(1.0));

  SUBCASE("a failing document does not sink the batch") {
    // strict cache covers every document except doc5
    for (std::size_t d = 0; d < pairs.size(); ++d) {
      if (d == 5) continue;
      for (const Sentence& s : pairs[d].doc_en.sentences) {
        good_cache->insert(Direction::en_to_vi(), s.text, s.text);
      }
      for (const Sentence& s : pairs[d].doc_vi.sentences) {
        good_cache->insert(Direction::vi_to_en(), s.text, s.text);
      }
    }
    CachedTranslator translator(std::make_shared<CacheTranslator>(good_cache, /*strict=*/true),
                                std::make_shared<TranslationCache>());
    const BatchResult r = align_batch(pairs, translator, {}, 2);
    CHECK(r.report.failed == 1);
    CHECK_FALSE(r.ok());
    CHECK_FALSE(r.outcomes[5].error.empty());
    CHECK(r.outcomes[5].error.find("doc5") != std::string::npos);
    REQUIRE(r.outcomes[4].result.has_value());
    CHECK(r.outcomes[4].result->matches.size() == 6);
  }
}

TEST_CASE("load_document drops blank lines and keeps order") {
  TempDir dir;
  write_file(dir.file("d.txt"), "one\n\n  \ntwo\r\nthree\n");
  const Document doc = load_document(dir.file("d.txt"), Lang::en, DomainTag::parse("wiki"));
  REQUIRE(doc.size() == 3);
  CHECK(doc.sentences[0].text == "one");
  CHECK(doc.sentences[1].text == "two");
  CHECK(doc.domain.str() == "wiki");
}
