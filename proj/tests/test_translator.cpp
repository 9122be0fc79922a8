#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <memory>
#include <thread>

#include <json.hpp>

#include "btk/aligner.hpp"
#include "btk/translator.hpp"
#include "helpers.hpp"

using namespace btk;
using namespace btk::testing;
using nlohmann::json;

namespace {

// In-process translate endpoint that brackets tokens (or echoes when asked);
// configurable failures.
class StubServer {
 public:
  explicit StubServer(int fail_first = 0, bool echo = false)
      : fail_remaining_(fail_first), echo_(echo) {
    server_.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (fail_remaining_ > 0) {
        --fail_remaining_;
        res.status = 500;
        return;
      }
      const json body = json::parse(req.body);
      const auto texts = body["texts"].get<std::vector<std::string>>();
      max_batch_seen_ = std::max(max_batch_seen_.load(), texts.size());
      sentences_ += texts.size();
      std::vector<std::string> translations;
      for (const std::string& text : texts) {
        if (drop_last_ && translations.size() + 1 == texts.size()) break;
        translations.push_back(echo_ ? text : "<" + text + ">");
      }
      res.set_content(json{{"translations", translations}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }
  std::size_t max_batch_seen() const { return max_batch_seen_.load(); }
  std::size_t sentences() const { return sentences_.load(); }
  void set_drop_last(bool drop) { drop_last_ = drop; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> fail_remaining_{0};
  std::atomic<std::size_t> max_batch_seen_{0};
  std::atomic<std::size_t> sentences_{0};
  bool drop_last_ = false;
  bool echo_ = false;
};

std::shared_ptr<LexiconTranslator> tiny_lexicon() {
  return std::make_shared<LexiconTranslator>(std::vector<std::pair<std::string, std::string>>{
      {"cat", "mèo"}, {"sat", "ngồi"}, {"world", "thế giới"}, {"hello world", "chào thế giới"}});
}

}  // namespace

TEST_CASE("direction validates its languages") {
  CHECK(Direction::en_to_vi().str() == "en->vi");
  CHECK_THROWS_AS(Direction(Lang::en, Lang::en), TranslatorError);
}

TEST_CASE("lexicon translates token by token with passthrough") {
  auto lex = tiny_lexicon();
  const std::vector<std::string> in{"mèo ngồi"};
  CHECK(lex->translate(Direction::vi_to_en(), in) == std::vector<std::string>{"cat sat"});
  const std::vector<std::string> unknown{"xyz"};
  CHECK(lex->translate(Direction::vi_to_en(), unknown) == std::vector<std::string>{"xyz"});
  const std::vector<std::string> forward{"cat sat"};
  CHECK(lex->translate(Direction::en_to_vi(), forward) == std::vector<std::string>{"mèo ngồi"});
}

TEST_CASE("lexicon prefers the longest multi-word match") {
  auto lex = tiny_lexicon();
  const std::vector<std::string> in{"hello world", "world"};
  const auto out = lex->translate(Direction::en_to_vi(), in);
  CHECK(out[0] == "chào thế giới");  // 2-token key wins over "world" alone
  CHECK(out[1] == "thế giới");
  const std::vector<std::string> back{"thế giới"};
  CHECK(lex->translate(Direction::vi_to_en(), back) == std::vector<std::string>{"world"});
}

TEST_CASE("lexicon translation is idempotent on unknown-token text") {
  auto lex = tiny_lexicon();
  const std::vector<std::string> in{"qq ww ee"};
  const auto once = lex->translate(Direction::vi_to_en(), in);
  const auto twice = lex->translate(Direction::vi_to_en(), once);
  CHECK(once == twice);
}

TEST_CASE("lexicon file parsing: comments ok, malformed lines named") {
  TempDir dir;
  write_file(dir.file("lex.tsv"), "# comment\ncat\tmèo\n\nsat\tngồi\n");
  LexiconTranslator lex(dir.file("lex.tsv"));
  const std::vector<std::string> in{"cat sat"};
  CHECK(lex.translate(Direction::en_to_vi(), in) == std::vector<std::string>{"mèo ngồi"});

  write_file(dir.file("bad.tsv"), "cat\tmèo\nno-tabs-here\n");
  try {
    LexiconTranslator bad(dir.file("bad.tsv"));
    FAIL("expected TranslatorError");
  } catch (const TranslatorError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("translate rejects blank texts and preserves length") {
  auto lex = tiny_lexicon();
  const std::vector<std::string> blank{"  "};
  CHECK_THROWS_AS(lex->translate(Direction::en_to_vi(), blank), TranslatorError);
  std::vector<std::string> many;
  for (int i = 0; i < 37; ++i) many.push_back("tok" + std::to_string(i));
  CHECK(lex->translate(Direction::en_to_vi(), many).size() == many.size());
}

TEST_CASE("cache serves stored translations and enforces strict mode") {
  auto cache = std::make_shared<TranslationCache>();
  cache->insert(Direction::en_to_vi(), "hello", "xin chào");
  CacheTranslator strict(cache, /*strict=*/true);
  const std::vector<std::string> hit{"hello"};
  CHECK(strict.translate(Direction::en_to_vi(), hit) == std::vector<std::string>{"xin chào"});
  const std::vector<std::string> miss{"goodbye"};
  try {
    strict.translate(Direction::en_to_vi(), miss);
    FAIL("expected TranslatorError");
  } catch (const TranslatorError& e) {
    CHECK(std::string(e.what()).find("goodbye") != std::string::npos);
  }
  CacheTranslator lax(cache, /*strict=*/false);
  CHECK(lax.translate(Direction::en_to_vi(), miss) == std::vector<std::string>{"goodbye"});
}

TEST_CASE("cache keys are direction-scoped and trimmed; first insert wins") {
  TranslationCache cache;
  CHECK(cache.insert(Direction::en_to_vi(), " hello ", "xin chào"));
  CHECK_FALSE(cache.insert(Direction::en_to_vi(), "hello", "SOMETHING ELSE"));
  CHECK(*cache.lookup(Direction::en_to_vi(), "hello") == "xin chào");
  CHECK_FALSE(cache.lookup(Direction::vi_to_en(), "hello").has_value());
  CHECK(cache.size() == 1);
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);
}

TEST_CASE("cache persists as appended JSONL") {
  TempDir dir;
  const std::string path = dir.file("cache.jsonl");
  TranslationCache cache;
  cache.insert(Direction::en_to_vi(), "one", "một");
  cache.flush_jsonl(path);
  cache.insert(Direction::en_to_vi(), "two", "hai");
  cache.flush_jsonl(path);
  cache.flush_jsonl(path);  // nothing new: no growth

  const std::string contents = read_file(path);
  CHECK(std::count(contents.begin(), contents.end(), '\n') == 2);

  TranslationCache loaded;
  loaded.load_jsonl(path, /*require_exists=*/true);
  CHECK(*loaded.lookup(Direction::en_to_vi(), "two") == "hai");
  TranslationCache missing;
  CHECK_THROWS_AS(missing.load_jsonl(dir.file("absent.jsonl"), true), TranslatorError);
}

TEST_CASE("warm_cache translates each distinct sentence once") {
  auto lex = tiny_lexicon();
  TranslationCache cache;
  const std::vector<std::string> three{"cat", "sat", "world"};
  WarmStats stats = warm_cache(*lex, Direction::en_to_vi(), three, cache);
  CHECK(stats.translated == 3);
  CHECK(lex->sentences_translated() == 3);

  const std::vector<std::string> repeated(10, "dog");
  stats = warm_cache(*lex, Direction::en_to_vi(), repeated, cache);
  CHECK(stats.requested == 10);
  CHECK(stats.unique == 1);
  CHECK(stats.translated == 1);
  CHECK(lex->sentences_translated() == 4);

  stats = warm_cache(*lex, Direction::en_to_vi(), repeated, cache);
  CHECK(stats.translated == 0);
  CHECK(stats.already_cached == 1);
  CHECK(lex->sentences_translated() == 4);
}

TEST_CASE("cached translator deduplicates before reaching the backend") {
  auto lex = tiny_lexicon();
  auto cache = std::make_shared<TranslationCache>();
  CachedTranslator cached(lex, cache);
  std::vector<std::string> texts;
  for (int i = 0; i < 30; ++i) texts.push_back("cat " + std::to_string(i % 10));
  const auto out = cached.translate(Direction::en_to_vi(), texts);
  CHECK(out.size() == texts.size());
  CHECK(out[0] == "mèo 0");
  CHECK(lex->sentences_translated() == 10);  // 10 distinct
  cached.translate(Direction::en_to_vi(), texts);
  CHECK(lex->sentences_translated() == 10);  // everything cached now
}

TEST_CASE("remote translator batches, retries and recovers") {
  StubServer server(/*fail_first=*/2);
  RemoteConfig config;
  config.endpoint = server.endpoint();
  config.max_batch = 4;
  config.retries = 3;
  config.backoff_ms = 1;
  RemoteTranslator remote(config);
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("s" + std::to_string(i));
  const auto out = remote.translate(Direction::en_to_vi(), texts);
  REQUIRE(out.size() == 10);
  CHECK(out[0] == "<s0>");
  CHECK(out[9] == "<s9>");
  CHECK(server.max_batch_seen() <= 4);
  CHECK(server.requests() >= 3 + 2);  // 3 batches plus 2 failed attempts
}

TEST_CASE("remote translator fails after the retry budget") {
  StubServer server(/*fail_first=*/100);
  RemoteConfig config;
  config.endpoint = server.endpoint();
  config.retries = 2;
  config.backoff_ms = 1;
  RemoteTranslator remote(config);
  const std::vector<std::string> texts{"x"};
  CHECK_THROWS_AS(remote.translate(Direction::en_to_vi(), texts), Error);
  CHECK(server.requests() == 3);  // initial try + 2 retries
}

TEST_CASE("remote translator rejects length mismatches") {
  StubServer server;
  server.set_drop_last(true);
  RemoteConfig config;
  config.endpoint = server.endpoint();
  config.retries = 0;
  RemoteTranslator remote(config);
  const std::vector<std::string> texts{"a", "b"};
  CHECK_THROWS_AS(remote.translate(Direction::en_to_vi(), texts), TranslatorError);
}

TEST_CASE("make_translator builds each backend variant") {
  TempDir dir;
  write_file(dir.file("lex.tsv"), "cat\tmèo\n");
  auto lex = make_translator(LexiconBackend{dir.file("lex.tsv")});
  const std::vector<std::string> in{"cat"};
  CHECK(lex->translate(Direction::en_to_vi(), in) == std::vector<std::string>{"mèo"});

  write_file(dir.file("cache.jsonl"),
             "{\"src\":\"en\",\"dst\":\"vi\",\"input\":\"hi\",\"output\":\"chào\"}\n");
  auto cache = make_translator(CacheBackend{dir.file("cache.jsonl"), true});
  const std::vector<std::string> hi{"hi"};
  CHECK(cache->translate(Direction::en_to_vi(), hi) == std::vector<std::string>{"chào"});

  CHECK_THROWS_AS(make_translator(CacheBackend{dir.file("nope.jsonl"), true}), TranslatorError);
}

TEST_CASE("the remote backend drives alignment within the call budget") {
  StubServer server(/*fail_first=*/0, /*echo=*/true);
  RemoteConfig config;
  config.endpoint = server.endpoint();
  config.max_batch = 3;
  config.backoff_ms = 1;
  auto remote = std::make_shared<RemoteTranslator>(config);
  CachedTranslator translator(remote, std::make_shared<TranslationCache>());

  Document doc_en;
  doc_en.lang = Lang::en;
  Document doc_vi;
  doc_vi.lang = Lang::vi;
  for (int i = 0; i < 8; ++i) {
    doc_en.append({"line number " + std::to_string(i), Lang::en});
    doc_vi.append({"line number " + std::to_string(i), Lang::vi});
  }
  const DocumentPair pair(std::move(doc_en), std::move(doc_vi), "remote");
  const btk::AlignmentResult result = btk::align_documents(pair, translator, {});
  CHECK(result.matches.size() == 8);
  CHECK(server.sentences() <= 16);  // one per sentence per direction
  CHECK(server.max_batch_seen() <= 3);
}

TEST_CASE("concurrent cached translation stays consistent") {
  auto lex = tiny_lexicon();
  auto cache = std::make_shared<TranslationCache>();
  CachedTranslator cached(lex, cache);
  std::vector<std::string> texts;
  for (int i = 0; i < 64; ++i) texts.push_back("cat tok" + std::to_string(i % 16));
  std::vector<std::vector<std::string>> results(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back(
        [&, t] { results[t] = cached.translate(Direction::en_to_vi(), texts); });
  }
  for (auto& th : threads) th.join();
  for (const auto& r : results) CHECK(r == results[0]);
  CHECK(cache->size() == 16);
}
