#include <doctest.h>

#include <random>

#include "btk/bleu.hpp"
#include "oracles.hpp"

using namespace btk;
using namespace btk::testing;

namespace {

BleuConfig with_smoothing(Smoothing s, int max_n = 4) {
  BleuConfig config;
  config.max_n = max_n;
  config.smoothing = s;
  return config;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", "d", "cat", "chào"};
  std::vector<std::string> out;
  const std::size_t len = bounded_rand(rng, max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(alphabet[bounded_rand(rng, alphabet.size())]);
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize splits punctuation in intl mode") {
  BleuConfig config;
  CHECK(tokenize("Hello, world", config) == std::vector<std::string>{"Hello", ",", "world"});
  CHECK(tokenize("(ok)!", config) == std::vector<std::string>{"(", "ok", ")", "!"});
  // digits stay attached to digits; non-punctuation symbols stay attached
  CHECK(tokenize("2.5 $5", config) == std::vector<std::string>{"2", ".", "5", "$5"});
}

TEST_CASE("tokenize whitespace mode collapses runs") {
  BleuConfig config;
  config.tokenizer = TokenizerKind::whitespace;
  CHECK(tokenize("a  b", config) == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("  Hello, world  ", config) == std::vector<std::string>{"Hello,", "world"});
  CHECK(tokenize("", config).empty());
}

TEST_CASE("tokenize lowercases only when case sensitivity is off") {
  BleuConfig config;
  config.case_sensitive = false;
  CHECK(tokenize("Xin chào!", config) == std::vector<std::string>{"xin", "chào", "!"});
  config.case_sensitive = true;
  CHECK(tokenize("Xin chào!", config) == std::vector<std::string>{"Xin", "chào", "!"});
}

TEST_CASE("sentence identity scores 100") {
  const BleuBreakdown b = sentence_bleu("the cat sat on the mat", "the cat sat on the mat", {});
  CHECK(b.score == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(b.brevity_penalty == 1.0);
  CHECK(b.hyp_len == 6);
  CHECK(b.ref_len == 6);
}

TEST_CASE("disjoint tokens score 0 without smoothing") {
  const BleuBreakdown b = sentence_bleu("aa bb cc", "xx yy zz", with_smoothing(Smoothing::none()));
  CHECK(b.score == 0.0);
  CHECK(b.precisions[0] == 0.0);
}

TEST_CASE("unigram clipping fixture scores 25") {
  const BleuBreakdown b =
      sentence_bleu("the the the the", "the cat", with_smoothing(Smoothing::none(), 1));
  CHECK(b.score == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(b.precisions[0] == doctest::Approx(0.25));
  CHECK(b.brevity_penalty == 1.0);
}

TEST_CASE("bigram clipping fixture") {
  // p1 = 2/4, p2 = 1/3, BP = 1 -> 100 * sqrt(1/6)
  const BleuBreakdown b =
      sentence_bleu("the cat the cat", "the cat sat", with_smoothing(Smoothing::none(), 2));
  CHECK(b.precisions[0] == doctest::Approx(0.5));
  CHECK(b.precisions[1] == doctest::Approx(1.0 / 3.0));
  CHECK(b.score == doctest::Approx(40.824829046386306).epsilon(1e-9));
}

TEST_CASE("brevity penalty fixture") {
  // perfect unigrams, hyp 2 vs ref 5 -> BP = exp(1 - 5/2)
  const BleuBreakdown b =
      sentence_bleu("the cat", "the cat sat on mat", with_smoothing(Smoothing::none(), 1));
  CHECK(b.brevity_penalty == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(b.score == doctest::Approx(22.313016014842982).epsilon(1e-9));
}

TEST_CASE("add_k smoothing applies to orders >= 2 only") {
  const BleuBreakdown b = sentence_bleu("a b", "a c", with_smoothing(Smoothing::add_k(1.0), 2));
  CHECK(b.precisions[0] == doctest::Approx(0.5));  // unsmoothed
  CHECK(b.precisions[1] == doctest::Approx(0.5));  // (0+1)/(1+1)
  CHECK(b.score == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("empty hypothesis scores 0") {
  const BleuBreakdown b = sentence_bleu("", "the cat", {});
  CHECK(b.score == 0.0);
  CHECK(b.hyp_len == 0);
  CHECK(b.brevity_penalty == 1.0);
}

TEST_CASE("sentence default smoothing keeps identity at 100 for short sentences") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto tokens = random_tokens(rng, 6);
    if (tokens.empty()) tokens.push_back("x");
    const std::string text = join_tokens(tokens);
    CHECK(sentence_bleu(text, text, {}).score == doctest::Approx(100.0).epsilon(1e-9));
  }
}

TEST_CASE("corpus identity and pooled fixture") {
  const std::vector<std::string> hyps = {"a b c", "x y"};
  const std::vector<std::string> refs = {"a b c", "p q"};
  SUBCASE("identity") {
    const BleuBreakdown b = corpus_bleu(hyps, hyps, {});
    CHECK(b.score == doctest::Approx(100.0).epsilon(1e-9));
  }
  SUBCASE("pooled counts, not per-sentence averages") {
    // 3 matched of 5 pooled unigrams -> p1 = 0.6, BP = 1
    BleuConfig config = with_smoothing(Smoothing::none(), 1);
    const BleuBreakdown b = corpus_bleu(hyps, refs, config);
    CHECK(b.precisions[0] == doctest::Approx(0.6));
    CHECK(b.score == doctest::Approx(60.0).epsilon(1e-9));
  }
}

TEST_CASE("single-sentence corpus equals sentence_bleu under the same config") {
  const BleuConfig config = with_smoothing(Smoothing::add_k(1.0));
  const std::vector<std::string> hyp = {"the cat sat"};
  const std::vector<std::string> ref = {"the cat on the mat"};
  const BleuBreakdown c = corpus_bleu(hyp, ref, config);
  const BleuBreakdown s = sentence_bleu(hyp[0], ref[0], config);
  CHECK(c.score == s.score);
  CHECK(c.precisions == s.precisions);
  CHECK(c.brevity_penalty == s.brevity_penalty);
}

TEST_CASE("corpus bleu rejects mismatched or empty input") {
  const std::vector<std::string> two = {"a", "b"};
  const std::vector<std::string> one = {"a"};
  CHECK_THROWS_AS(corpus_bleu(two, one, {}), BleuError);
  CHECK_THROWS_AS(corpus_bleu({}, {}, {}), BleuError);
}

TEST_CASE("corpus score is invariant under paired permutation") {
  std::mt19937_64 rng(21);
  std::vector<std::string> hyps, refs;
  for (int i = 0; i < 20; ++i) {
    hyps.push_back(join_tokens(random_tokens(rng, 8)));
    refs.push_back(join_tokens(random_tokens(rng, 8)));
    if (hyps.back().empty()) hyps.back() = "pad";
    if (refs.back().empty()) refs.back() = "pad";
  }
  BleuConfig config = with_smoothing(Smoothing::none(), 2);
  const double base = corpus_bleu(hyps, refs, config).score;
  std::vector<std::size_t> order(hyps.size());
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order, rng);
  std::vector<std::string> hyps2, refs2;
  for (std::size_t i : order) {
    hyps2.push_back(hyps[i]);
    refs2.push_back(refs[i]);
  }
  CHECK(corpus_bleu(hyps2, refs2, config).score == base);
}

TEST_CASE("brevity penalty is monotone in hypothesis length") {
  double prev = 0.0;
  for (int len = 1; len <= 10; ++len) {
    std::vector<std::string> tokens(static_cast<std::size_t>(len), "a");
    const BleuBreakdown b = sentence_bleu(join_tokens(tokens), "a a a a a a a a a a",
                                          with_smoothing(Smoothing::none(), 1));
    CHECK(b.brevity_penalty >= prev);
    prev = b.brevity_penalty;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("property: matches the direct-counting oracle without smoothing") {
  std::mt19937_64 rng(1234);
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const int max_n = 1 + static_cast<int>(bounded_rand(rng, 2));
    auto hyp_tokens = random_tokens(rng, 8);
    auto ref_tokens = random_tokens(rng, 8);
    BleuConfig config = with_smoothing(Smoothing::none(), max_n);
    config.tokenizer = TokenizerKind::whitespace;
    const BleuBreakdown got =
        sentence_bleu(join_tokens(hyp_tokens), join_tokens(ref_tokens), config);
    const OracleBleu want = oracle_bleu({hyp_tokens}, {ref_tokens}, max_n);
    REQUIRE(got.score == doctest::Approx(want.score).epsilon(1e-9));
    REQUIRE(got.brevity_penalty == doctest::Approx(want.brevity_penalty).epsilon(1e-12));
    for (int n = 0; n < max_n; ++n) {
      REQUIRE(got.precisions[n] == doctest::Approx(want.precisions[n]).epsilon(1e-12));
    }
    ++checked;
  }
  CHECK(checked == 600);
}

TEST_CASE("property: corpus pooling matches the oracle") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int max_n = 1 + static_cast<int>(bounded_rand(rng, 2));
    std::vector<std::vector<std::string>> hyps, refs;
    std::vector<std::string> hyp_lines, ref_lines;
    const std::size_t sentences = 1 + bounded_rand(rng, 5);
    bool any_hyp_token = false;
    for (std::size_t s = 0; s < sentences; ++s) {
      hyps.push_back(random_tokens(rng, 6));
      refs.push_back(random_tokens(rng, 6));
      any_hyp_token = any_hyp_token || !hyps.back().empty();
      hyp_lines.push_back(join_tokens(hyps.back()));
      ref_lines.push_back(join_tokens(refs.back()));
    }
    if (!any_hyp_token) continue;
    BleuConfig config = with_smoothing(Smoothing::none(), max_n);
    config.tokenizer = TokenizerKind::whitespace;
    const BleuBreakdown got = corpus_bleu(hyp_lines, ref_lines, config);
    const OracleBleu want = oracle_bleu(hyps, refs, max_n);
    REQUIRE(got.score == doctest::Approx(want.score).epsilon(1e-9));
  }
}

TEST_CASE("score and components stay in range") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hyp = join_tokens(random_tokens(rng, 8));
    const auto ref = join_tokens(random_tokens(rng, 8));
    const BleuBreakdown b = sentence_bleu(hyp, ref, {});
    CHECK(b.score >= 0.0);
    CHECK(b.score <= 100.0 + 1e-9);
    CHECK(b.brevity_penalty > 0.0);
    CHECK(b.brevity_penalty <= 1.0);
    for (double p : b.precisions) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("config validation") {
  BleuConfig bad;
  bad.max_n = 0;
  CHECK_THROWS_AS(tokenize("x", bad), BleuError);
  BleuConfig bad_k;
  bad_k.smoothing = Smoothing::add_k(0.0);
  CHECK_THROWS_AS(sentence_bleu("a", "a", bad_k), BleuError);
  CHECK(parse_tokenizer("intl") == TokenizerKind::intl);
  CHECK(parse_smoothing("add_k:2.5").k == doctest::Approx(2.5));
  CHECK(parse_smoothing("none").kind == Smoothing::Kind::none);
  CHECK_THROWS_AS(parse_smoothing("bogus"), BleuError);
}
