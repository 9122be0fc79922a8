#include <doctest.h>

#include <random>
#include <set>

#include "btk/corpus.hpp"
#include "helpers.hpp"

using namespace btk;
using namespace btk::testing;

namespace {

SentencePair mk(const std::string& en, const std::string& vi, const std::string& domain = "other",
                int tier = 1) {
  SentencePair p;
  p.en = {en, Lang::en};
  p.vi = {vi, Lang::vi};
  p.domain = DomainTag::parse(domain);
  p.tier = tier;
  p.source_id = "test";
  return p;
}

bool equal_corpora(const Corpus& a, const Corpus& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_pair(a.pairs[i], b.pairs[i])) return false;
  }
  return true;
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> domains = {"law", "news", "medical", "colloquial"};
  Corpus c;
  c.name = "random";
  for (std::size_t i = 0; i < n; ++i) {
    SentencePair p = mk("en sentence " + std::to_string(bounded_rand(rng, 50)),
                        "câu tiếng việt " + std::to_string(bounded_rand(rng, 50)),
                        domains[bounded_rand(rng, domains.size())],
                        1 + static_cast<int>(bounded_rand(rng, 4)));
    if (bounded_rand(rng, 2)) p.score = static_cast<double>(bounded_rand(rng, 1000)) / 7.0;
    if (bounded_rand(rng, 3) == 0) p.extra["meta"] = {{"k", static_cast<int>(i)}};
    c.pairs.push_back(std::move(p));
  }
  return c;
}

}  // namespace

TEST_CASE("domain tags parse known names and keep unknown strings") {
  CHECK(DomainTag::parse("law").kind == DomainTag::Kind::law);
  CHECK(DomainTag::parse("law").str() == "law");
  const DomainTag other = DomainTag::parse("colloquial");
  CHECK(other.kind == DomainTag::Kind::other);
  CHECK(other.str() == "colloquial");
  CHECK(DomainTag::parse("medical") == DomainTag(DomainTag::Kind::medical));
  CHECK_FALSE(DomainTag::parse("x") == DomainTag::parse("y"));
}

TEST_CASE("document append enforces language and non-blank text") {
  Document doc;
  doc.lang = Lang::en;
  doc.append({"hello", Lang::en});
  CHECK_THROWS_AS(doc.append({"xin chào", Lang::vi}), CorpusError);
  CHECK_THROWS_AS(doc.append({"   ", Lang::en}), CorpusError);
  CHECK(doc.size() == 1);
}

TEST_CASE("line-pair ingest preserves file order") {
  TempDir dir;
  write_file(dir.file("doc.en"), "one\ntwo\nthree\n");
  write_file(dir.file("doc.vi"), "một\nhai\nba\n");
  const Corpus c = ingest(dir.file("doc"), CorpusFormat::line_pair, DomainTag::parse("news"), 2);
  REQUIRE(c.size() == 3);
  CHECK(c.pairs[0].en.text == "one");
  CHECK(c.pairs[0].vi.text == "một");
  CHECK(c.pairs[2].en.text == "three");
  CHECK(c.pairs[1].domain.str() == "news");
  CHECK(c.pairs[1].tier == 2);
  // accepts either the base path or a side file
  const Corpus c2 = ingest(dir.file("doc.en"), CorpusFormat::line_pair, DomainTag(), 1);
  CHECK(c2.size() == c.size());
}

TEST_CASE("line-pair ingest reports line-count mismatch with counts and index") {
  TempDir dir;
  write_file(dir.file("doc.en"), "a\nb\nc\nd\ne\n");
  write_file(dir.file("doc.vi"), "1\n2\n3\n4\n");
  try {
    ingest(dir.file("doc"), CorpusFormat::line_pair, DomainTag(), 1);
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("5") != std::string::npos);
    CHECK(msg.find("4") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);
  }
}

TEST_CASE("blank sides are dropped with a counted warning") {
  TempDir dir;
  write_file(dir.file("doc.en"), "a\n   \nc\n");
  write_file(dir.file("doc.vi"), "1\n2\n3\n");
  IngestReport report;
  const Corpus c = ingest(dir.file("doc"), CorpusFormat::line_pair, DomainTag(), 1, &report);
  CHECK(c.size() == 2);
  CHECK(report.dropped_blank == 1);
  CHECK(report.records_read == 3);
}

TEST_CASE("crlf input is accepted") {
  TempDir dir;
  write_file(dir.file("doc.en"), "a\r\nb\r\n");
  write_file(dir.file("doc.vi"), "1\r\n2\r\n");
  const Corpus c = ingest(dir.file("doc"), CorpusFormat::line_pair, DomainTag(), 1);
  REQUIRE(c.size() == 2);
  CHECK(c.pairs[0].en.text == "a");
}

TEST_CASE("jsonl ingest maps fields and keeps unknown keys") {
  TempDir dir;
  write_file(dir.file("c.jsonl"),
             "{\"en\":\"x\",\"vi\":\"y\",\"domain\":\"law\",\"tier\":4}\n"
             "{\"en\":\"a\",\"vi\":\"b\",\"note\":\"keep me\",\"n\":7}\n");
  const Corpus c = ingest(dir.file("c.jsonl"), CorpusFormat::jsonl, DomainTag::parse("news"), 1);
  REQUIRE(c.size() == 2);
  CHECK(c.pairs[0].domain.str() == "law");
  CHECK(c.pairs[0].tier == 4);
  CHECK(c.pairs[1].domain.str() == "news");  // default applies
  CHECK(c.pairs[1].tier == 1);
  CHECK(c.pairs[1].extra["note"] == "keep me");
  CHECK(c.pairs[1].extra["n"] == 7);
}

TEST_CASE("jsonl ingest errors carry line numbers") {
  TempDir dir;
  write_file(dir.file("bad.jsonl"), "{\"en\":\"x\",\"vi\":\"y\"}\nnot json\n");
  try {
    ingest(dir.file("bad.jsonl"), CorpusFormat::jsonl, DomainTag(), 1);
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  write_file(dir.file("bad2.jsonl"), "{\"en\":\"x\"}\n");
  CHECK_THROWS_AS(ingest(dir.file("bad2.jsonl"), CorpusFormat::jsonl, DomainTag(), 1), CorpusError);
  write_file(dir.file("bad3.jsonl"), "{\"en\":\"x\",\"vi\":\"y\",\"tier\":9}\n");
  CHECK_THROWS_AS(ingest(dir.file("bad3.jsonl"), CorpusFormat::jsonl, DomainTag(), 1), CorpusError);
}

TEST_CASE("tsv ingest sniffs the header and reads optional columns") {
  TempDir dir;
  write_file(dir.file("c.tsv"), "en\tvi\tdomain\ttier\nhello\txin chào\tlaw\t3\nbye\ttạm biệt\n");
  const Corpus c = ingest(dir.file("c.tsv"), CorpusFormat::tsv, DomainTag::parse("wiki"), 2);
  REQUIRE(c.size() == 2);
  CHECK(c.pairs[0].domain.str() == "law");
  CHECK(c.pairs[0].tier == 3);
  CHECK(c.pairs[1].domain.str() == "wiki");
  CHECK(c.pairs[1].tier == 2);

  write_file(dir.file("noheader.tsv"), "hello\txin chào\n");
  CHECK(ingest(dir.file("noheader.tsv"), CorpusFormat::tsv, DomainTag(), 1).size() == 1);

  write_file(dir.file("bad.tsv"), "only one column\n");
  try {
    ingest(dir.file("bad.tsv"), CorpusFormat::tsv, DomainTag(), 1);
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("merge concatenates in argument order without dedup") {
  Corpus a;
  a.pairs = {mk("a1", "x1"), mk("a2", "x2")};
  Corpus b;
  b.pairs = {mk("b1", "y1"), mk("b2", "y2"), mk("b3", "y3")};
  const Corpus m = merge({a, b});
  REQUIRE(m.size() == 5);
  CHECK(m.pairs[0].en.text == "a1");
  CHECK(m.pairs[2].en.text == "b1");
  CHECK(merge({}).size() == 0);
  CHECK(merge({a, a}).size() == 4);  // duplicates retained
}

TEST_CASE("stats counts domains, tiers and tokens") {
  Corpus c;
  for (int i = 0; i < 3; ++i) c.pairs.push_back(mk("a b", "x", "law", 1));
  for (int i = 0; i < 2; ++i) c.pairs.push_back(mk("c", "y z", "news", 3));
  c.pairs[2].tier = 1;
  const StatsReport report = stats(c);
  CHECK(report.total == 5);
  CHECK(report.per_domain.at("law") == 3);
  CHECK(report.per_domain.at("news") == 2);
  CHECK(report.per_tier.at(1) == 3);
  CHECK(report.per_tier.at(3) == 2);
  CHECK(report.tokens_en == 3 * 2 + 2 * 1);
  CHECK(report.tokens_vi == 3 * 1 + 2 * 2);
  CHECK(report.length_hist_en.at(2) == 3);

  const StatsReport empty = stats(Corpus{});
  CHECK(empty.total == 0);
  CHECK(empty.per_domain.empty());
  CHECK(empty.tokens_en == 0);
}

TEST_CASE("stats tier histogram matches construction") {
  Corpus c;
  c.pairs = {mk("a", "x", "law", 1), mk("b", "y", "law", 1), mk("c", "z", "law", 3)};
  const StatsReport report = stats(c);
  CHECK(report.per_tier.at(1) == 2);
  CHECK(report.per_tier.at(3) == 1);
  CHECK(report.per_tier.count(2) == 0);
}

TEST_CASE("stats are additive under merge") {
  std::mt19937_64 rng(17);
  const Corpus a = random_corpus(rng, 40);
  const Corpus b = random_corpus(rng, 25);
  const StatsReport sa = stats(a);
  const StatsReport sb = stats(b);
  const StatsReport sm = stats(merge({a, b}));
  CHECK(sm.total == sa.total + sb.total);
  for (const auto& [domain, count] : sm.per_domain) {
    std::size_t want = 0;
    if (sa.per_domain.count(domain)) want += sa.per_domain.at(domain);
    if (sb.per_domain.count(domain)) want += sb.per_domain.at(domain);
    CHECK(count == want);
  }
  CHECK(sm.tokens_en == sa.tokens_en + sb.tokens_en);
}

TEST_CASE("sample_test_set partitions deterministically") {
  Corpus c;
  c.pairs = {mk("a", "1", "law"), mk("b", "2", "law"), mk("c", "3", "law"),
             mk("d", "4", "news"), mk("e", "5", "news")};
  std::map<DomainTag, std::size_t> want{{DomainTag::parse("law"), 1}};
  const SampleSplit split = sample_test_set(c, want, 42);
  CHECK(split.test.size() == 1);
  CHECK(split.remainder.size() == 4);
  CHECK(split.test.pairs[0].domain.str() == "law");

  // partition: every original pair appears exactly once across both outputs
  const Corpus joined = merge({split.test, split.remainder});
  std::multiset<std::string> all, orig;
  for (const auto& p : joined.pairs) all.insert(p.en.text);
  for (const auto& p : c.pairs) orig.insert(p.en.text);
  CHECK(all == orig);

  const SampleSplit again = sample_test_set(c, want, 42);
  CHECK(equal_corpora(split.test, again.test));
  CHECK(equal_corpora(split.remainder, again.remainder));
}

TEST_CASE("sample_test_set reports shortfalls by domain") {
  Corpus c;
  c.pairs = {mk("a", "1", "news"), mk("b", "2", "news")};
  std::map<DomainTag, std::size_t> want{{DomainTag::parse("news"), 4}};
  try {
    sample_test_set(c, want, 1);
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("news") != std::string::npos);
    CHECK(msg.find("shortfall 2") != std::string::npos);
  }
}

TEST_CASE("sample_test_set exact per-domain counts on larger corpora") {
  std::mt19937_64 rng(5);
  const Corpus c = random_corpus(rng, 300);
  const StatsReport before = stats(c);
  std::map<DomainTag, std::size_t> want;
  for (const auto& [domain, count] : before.per_domain) {
    want[DomainTag::parse(domain)] = count / 2;
  }
  const SampleSplit split = sample_test_set(c, want, 9);
  const StatsReport test_stats = stats(split.test);
  for (const auto& [domain, count] : want) {
    const std::size_t got =
        test_stats.per_domain.count(domain.str()) ? test_stats.per_domain.at(domain.str()) : 0;
    CHECK(got == count);
  }
  CHECK(split.test.size() + split.remainder.size() == c.size());
}

TEST_CASE("jsonl export round-trips exactly") {
  TempDir dir;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Corpus c = random_corpus(rng, bounded_rand(rng, 30));
    const std::string path = dir.file("rt.jsonl");
    export_corpus(c, path, CorpusFormat::jsonl);
    const Corpus back = ingest(path, CorpusFormat::jsonl, DomainTag(), 1);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      // source defaults to the corpus name on ingest when absent; we always
      // write it, so the round trip is exact.
      REQUIRE(same_pair(back.pairs[i], c.pairs[i]));
    }
  }
}

TEST_CASE("line-pair export round-trips the text") {
  TempDir dir;
  Corpus c;
  c.pairs = {mk("hello world", "xin chào"), mk("two", "hai")};
  export_corpus(c, dir.file("out"), CorpusFormat::line_pair);
  CHECK(read_file(dir.file("out.en")) == "hello world\ntwo\n");
  const Corpus back = ingest(dir.file("out"), CorpusFormat::line_pair, DomainTag(), 1);
  REQUIRE(back.size() == 2);
  CHECK(back.pairs[0].en.text == "hello world");
  CHECK(back.pairs[0].vi.text == "xin chào");
}

TEST_CASE("tsv export round-trips text, domain and tier") {
  TempDir dir;
  Corpus c;
  c.pairs = {mk("hello", "chào", "law", 4)};
  export_corpus(c, dir.file("out.tsv"), CorpusFormat::tsv);
  const Corpus back = ingest(dir.file("out.tsv"), CorpusFormat::tsv, DomainTag(), 1);
  REQUIRE(back.size() == 1);
  CHECK(back.pairs[0].domain.str() == "law");
  CHECK(back.pairs[0].tier == 4);
}

TEST_CASE("export of an empty corpus produces a valid empty file") {
  TempDir dir;
  export_corpus(Corpus{}, dir.file("empty.jsonl"), CorpusFormat::jsonl);
  CHECK(read_file(dir.file("empty.jsonl")).empty());
  CHECK(ingest(dir.file("empty.jsonl"), CorpusFormat::jsonl, DomainTag(), 1).size() == 0);
}
