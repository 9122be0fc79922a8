#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "btk/corpus.hpp"
#include "btk/util.hpp"

namespace btk {

class TranslatorError : public Error {
 public:
  using Error::Error;
};

struct Direction {
  Lang src;
  Lang dst;

  Direction(Lang s, Lang d) : src(s), dst(d) {
    if (src == dst) throw TranslatorError("direction must cross languages");
  }
  static Direction en_to_vi() { return {Lang::en, Lang::vi}; }
  static Direction vi_to_en() { return {Lang::vi, Lang::en}; }
  std::string str() const {
    return std::string(to_string(src)) + "->" + std::string(to_string(dst));
  }
  friend bool operator==(const Direction& a, const Direction& b) {
    return a.src == b.src && a.dst == b.dst;
  }
};

// Keys are (direction, whitespace-trimmed source text). First insertion wins;
// later inserts of the same key are ignored.
class TranslationCache {
 public:
  std::optional<std::string> lookup(const Direction& dir, std::string_view text) const;
  bool insert(const Direction& dir, std::string_view text, std::string translation);
  bool contains(const Direction& dir, std::string_view text) const;

  // JSONL persistence: {"src","dst","input","output"} per line. flush appends
  // entries added since the previous flush.
  void load_jsonl(const std::string& path, bool require_exists = false);
  void flush_jsonl(const std::string& path);

  std::size_t size() const;
  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

 private:
  struct Entry {
    std::string src;
    std::string dst;
    std::string input;
    std::string output;
  };
  static std::string key(const Direction& dir, std::string_view text);

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::vector<Entry> unflushed_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

class Translator {
 public:
  virtual ~Translator() = default;

  // Output is parallel to input. All texts must be non-empty after trimming.
  std::vector<std::string> translate(const Direction& dir, std::span<const std::string> texts);

  // Cumulative sentences pushed through this backend (the M+N budget meter).
  std::uint64_t sentences_translated() const { return sentences_.load(); }
  std::uint64_t batch_calls() const { return batches_.load(); }

 protected:
  virtual std::vector<std::string> do_translate(const Direction& dir,
                                                std::span<const std::string> texts) = 0;

 private:
  std::atomic<std::uint64_t> sentences_{0};
  std::atomic<std::uint64_t> batches_{0};
};

// Debugging backend: every sentence translates to itself.
class IdentityTranslator : public Translator {
 protected:
  std::vector<std::string> do_translate(const Direction&,
                                        std::span<const std::string> texts) override {
    return {texts.begin(), texts.end()};
  }
};

// Token-table translation with longest-match-first multi-word keys. Unknown
// tokens pass through unchanged. The table file is two-column TSV read as
// en -> vi; the vi -> en table is its inversion.
class LexiconTranslator : public Translator {
 public:
  explicit LexiconTranslator(const std::string& path);
  explicit LexiconTranslator(const std::vector<std::pair<std::string, std::string>>& en_vi);

 protected:
  std::vector<std::string> do_translate(const Direction& dir,
                                        std::span<const std::string> texts) override;

 private:
  struct Table {
    // first token -> candidate (token sequence, replacement), longest first
    std::unordered_map<std::string, std::vector<std::pair<std::vector<std::string>, std::string>>>
        by_first;
    std::size_t max_len = 1;
  };
  void add_entry(const std::string& src, const std::string& dst, Table& table);
  void build(const std::vector<std::pair<std::string, std::string>>& en_vi);
  static std::string apply(const Table& table, const std::string& text);

  Table en_to_vi_;
  Table vi_to_en_;
};

// Serves translations from a preloaded cache. In strict mode a miss is an
// error naming the text; otherwise the input passes through unchanged.
class CacheTranslator : public Translator {
 public:
  CacheTranslator(std::shared_ptr<TranslationCache> cache, bool strict)
      : cache_(std::move(cache)), strict_(strict) {}

 protected:
  std::vector<std::string> do_translate(const Direction& dir,
                                        std::span<const std::string> texts) override;

 private:
  std::shared_ptr<TranslationCache> cache_;
  bool strict_;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://localhost:8080
  double timeout_s = 30.0;
  int max_batch = 64;
  int retries = 3;
  int concurrency = 1;
  int backoff_ms = 50;
};

// POST {endpoint}/translate {"source_lang","target_lang","texts"} ->
// {"translations":[...]}. Batches up to max_batch, bounded retries per batch.
class RemoteTranslator : public Translator {
 public:
  explicit RemoteTranslator(RemoteConfig config);

 protected:
  std::vector<std::string> do_translate(const Direction& dir,
                                        std::span<const std::string> texts) override;

 private:
  std::vector<std::string> translate_batch(const Direction& dir,
                                           std::span<const std::string> texts);
  RemoteConfig config_;
};

// Serves from the cache and forwards unique misses to the inner backend,
// inserting results so repeated texts cost one backend sentence.
class CachedTranslator : public Translator {
 public:
  CachedTranslator(std::shared_ptr<Translator> inner, std::shared_ptr<TranslationCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  Translator& inner() { return *inner_; }
  TranslationCache& cache() { return *cache_; }

 protected:
  std::vector<std::string> do_translate(const Direction& dir,
                                        std::span<const std::string> texts) override;

 private:
  std::shared_ptr<Translator> inner_;
  std::shared_ptr<TranslationCache> cache_;
};

struct LexiconBackend {
  std::string path;
};
struct CacheBackend {
  std::string path;
  bool strict = true;
};
struct RemoteBackend {
  RemoteConfig config;
};
using BackendSpec = std::variant<LexiconBackend, CacheBackend, RemoteBackend>;

std::unique_ptr<Translator> make_translator(const BackendSpec& spec);

struct WarmStats {
  std::size_t requested = 0;
  std::size_t unique = 0;
  std::size_t already_cached = 0;
  std::size_t translated = 0;
};

// Translates each distinct uncached sentence exactly once and stores the
// result. On backend failure, completed chunks stay in the cache.
WarmStats warm_cache(Translator& backend, const Direction& dir,
                     std::span<const std::string> sentences, TranslationCache& cache);

}  // namespace btk
