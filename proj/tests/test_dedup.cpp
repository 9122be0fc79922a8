#include <doctest.h>

#include <random>
#include <set>

#include "btk/dedup.hpp"
#include "helpers.hpp"

using namespace btk;
using namespace btk::testing;

namespace {

SentencePair mk(const std::string& en, const std::string& vi) {
  SentencePair p;
  p.en = {en, Lang::en};
  p.vi = {vi, Lang::vi};
  return p;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"The", "cat",  "sat",  "chào", "thế",
                                                 "é",   "e\xCC\x81", "GIỚI", "x,y",  "2.5"};
  std::string out;
  const std::size_t len = 1 + bounded_rand(rng, 6);
  for (std::size_t i = 0; i < len; ++i) {
    if (i) out += bounded_rand(rng, 3) == 0 ? "  " : " ";
    out += words[bounded_rand(rng, words.size())];
  }
  return out;
}

}  // namespace

TEST_CASE("normalize applies the default policy") {
  CHECK(normalize("  The CAT  ", {}) == "the cat");
  CHECK(normalize("a\t\tb", {}) == "a b");
  CHECK(normalize("", {}) == "");
}

TEST_CASE("normalize unifies both encodings of the same visible string") {
  const std::string decomposed = "caf\x65\xCC\x81";  // e + combining acute
  const std::string precomposed = "café";
  CHECK(normalize(decomposed, {}) == normalize(precomposed, {}));
  NormalizationPolicy no_nfc;
  no_nfc.unicode_canonical = false;
  CHECK(normalize(decomposed, no_nfc) != normalize(precomposed, no_nfc));
}

TEST_CASE("normalize strips punctuation only when asked") {
  NormalizationPolicy punct;
  punct.strip_punct = true;
  CHECK(normalize("Hello, world!", punct) == "hello world");
  CHECK(normalize("a , b", punct) == "a b");  // no double spaces left behind
  CHECK(normalize("Hello, world!", {}) == "hello, world!");
}

TEST_CASE("normalize is idempotent under every policy combination") {
  std::mt19937_64 rng(99);
  for (int mask = 0; mask < 16; ++mask) {
    NormalizationPolicy policy;
    policy.unicode_canonical = mask & 1;
    policy.casefold = mask & 2;
    policy.collapse_whitespace = mask & 4;
    policy.strip_punct = mask & 8;
    for (int trial = 0; trial < 40; ++trial) {
      const std::string text = random_text(rng);
      const std::string once = normalize(text, policy);
      REQUIRE(normalize(once, policy) == once);
    }
  }
}

TEST_CASE("dedup_within keeps first occurrences") {
  Corpus c;
  c.pairs = {mk("a", "x"), mk("a", "x"), mk("a", "x")};
  const auto [out, report] = dedup_within(c, {});
  CHECK(out.size() == 1);
  CHECK(report.removed_duplicates == 2);
  CHECK(report.input == 3);
  CHECK(report.removal_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("dedup_within is the identity on distinct corpora") {
  Corpus c;
  for (int i = 0; i < 20; ++i) c.pairs.push_back(mk("en" + std::to_string(i), "vi"));
  const auto [out, report] = dedup_within(c, {});
  CHECK(out.size() == 20);
  CHECK(report.removed_duplicates == 0);
  for (std::size_t i = 0; i < 20; ++i) CHECK(same_pair(out.pairs[i], c.pairs[i]));
}

TEST_CASE("normalized variants are duplicates") {
  Corpus c;
  c.pairs = {mk("The cat", "con mèo"), mk("  the CAT ", "CON  MÈO"), mk("the cat", "con mèo khác")};
  const auto [out, report] = dedup_within(c, {});
  CHECK(out.size() == 2);  // same en with different vi survives
  CHECK(report.removed_duplicates == 1);
  CHECK(out.pairs[0].en.text == "The cat");
  CHECK(out.pairs[1].vi.text == "con mèo khác");
}

TEST_CASE("constructed 25 percent duplication is measured exactly") {
  std::mt19937_64 rng(123);
  Corpus c;
  const std::size_t unique = 1500;
  for (std::size_t i = 0; i < unique; ++i) {
    c.pairs.push_back(mk("sentence number " + std::to_string(i),
                         "câu số " + std::to_string(i)));
  }
  // inject unique/3 normalized duplicates -> 25% of the final corpus
  for (std::size_t i = 0; i < unique / 3; ++i) {
    const std::size_t victim = bounded_rand(rng, unique);
    SentencePair dup = c.pairs[victim];
    dup.en.text = "  " + dup.en.text + " ";
    const std::size_t at = bounded_rand(rng, c.pairs.size() + 1);
    c.pairs.insert(c.pairs.begin() + static_cast<std::ptrdiff_t>(at), std::move(dup));
  }
  REQUIRE(c.size() == 2000);
  const auto [out, report] = dedup_within(c, {});
  CHECK(out.size() == 1500);
  CHECK(report.removal_fraction == 0.25);

  const auto [again, second] = dedup_within(out, {});
  CHECK(again.size() == out.size());
  CHECK(second.removed_duplicates == 0);
}

TEST_CASE("dedup output has no duplicate keys") {
  std::mt19937_64 rng(5);
  Corpus c;
  for (int i = 0; i < 300; ++i) c.pairs.push_back(mk(random_text(rng), random_text(rng)));
  const auto [out, report] = dedup_within(c, {});
  std::set<std::string> keys;
  for (const SentencePair& pair : out.pairs) {
    CHECK(keys.insert(dedup_key(pair, {})).second);
  }
  CHECK(out.size() + report.removed_duplicates == c.size());
}

TEST_CASE("paranoid mode matches fingerprint mode") {
  std::mt19937_64 rng(6);
  Corpus c;
  for (int i = 0; i < 400; ++i) c.pairs.push_back(mk(random_text(rng), random_text(rng)));
  DedupOptions fast;
  DedupOptions paranoid;
  paranoid.paranoid = true;
  const auto [a, ra] = dedup_within(c, {}, fast);
  const auto [b, rb] = dedup_within(c, {}, paranoid);
  REQUIRE(a.size() == b.size());
  CHECK(ra.removed_duplicates == rb.removed_duplicates);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_pair(a.pairs[i], b.pairs[i]));
}

TEST_CASE("parallel fingerprinting matches single-threaded") {
  std::mt19937_64 rng(61);
  Corpus c;
  for (int i = 0; i < 500; ++i) c.pairs.push_back(mk(random_text(rng), random_text(rng)));
  DedupOptions serial;
  DedupOptions parallel;
  parallel.workers = 8;
  const auto [a, ra] = dedup_within(c, {}, serial);
  const auto [b, rb] = dedup_within(c, {}, parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_pair(a.pairs[i], b.pairs[i]));
}

TEST_CASE("dedup_against removes cross-corpus overlap") {
  Corpus a;
  a.pairs = {mk("one", "một"), mk("two", "hai"), mk("three", "ba"), mk("four", "bốn"),
             mk("five", "năm")};
  Corpus b;
  b.pairs = {mk("TWO", "HAI"), mk("four", "bốn"), mk("other", "khác")};

  SUBCASE("overlap is dropped, order preserved") {
    const auto [out, report] = dedup_against(a, b, {});
    REQUIRE(out.size() == 3);
    CHECK(out.pairs[0].en.text == "one");
    CHECK(out.pairs[1].en.text == "three");
    CHECK(out.pairs[2].en.text == "five");
    CHECK(report.removed_overlap == 2);
    CHECK(report.removed_duplicates == 0);
  }
  SUBCASE("disjoint corpora pass through") {
    Corpus disjoint;
    disjoint.pairs = {mk("x", "y")};
    const auto [out, report] = dedup_against(a, disjoint, {});
    CHECK(out.size() == 5);
    CHECK(report.removed_overlap == 0);
  }
  SUBCASE("a subset of the reference empties out") {
    const auto [out, report] = dedup_against(b, merge({a, b}), {});
    CHECK(out.size() == 0);
    CHECK(report.kept == 0);
  }
  SUBCASE("within-duplicates and overlap add up") {
    Corpus noisy;
    noisy.pairs = {mk("one", "một"), mk("one", "một"), mk("two", "hai"), mk("new", "mới")};
    const auto [within, wreport] = dedup_within(noisy, {});
    const auto [out, report] = dedup_against(noisy, b, {});
    CHECK(out.size() + report.removed_overlap == within.size());
    CHECK(report.removed_duplicates == wreport.removed_duplicates);
  }
}

TEST_CASE("dedup report serializes") {
  Corpus c;
  c.pairs = {mk("a", "b"), mk("a", "b")};
  const auto [out, report] = dedup_within(c, {});
  const auto j = report.to_json();
  CHECK(j["input"] == 2);
  CHECK(j["kept"] == 1);
  CHECK(j["removal_fraction"] == 0.5);
}
