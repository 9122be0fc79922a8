#include "btk/translator.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "btk/http.hpp"
#include "btk/unicode.hpp"

namespace btk {

namespace {

using nlohmann::json;

std::vector<std::string> ws_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : utf8::decode(text)) {
    if (unicode::is_space(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      utf8::append(current, cp);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::string TranslationCache::key(const Direction& dir, std::string_view text) {
  std::string k(to_string(dir.src));
  k += '\x1f';
  k += to_string(dir.dst);
  k += '\x1f';
  k += trim(text);
  return k;
}

std::optional<std::string> TranslationCache::lookup(const Direction& dir,
                                                    std::string_view text) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key(dir, text));
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

bool TranslationCache::contains(const Direction& dir, std::string_view text) const {
  std::shared_lock lock(mutex_);
  return entries_.count(key(dir, text)) > 0;
}

bool TranslationCache::insert(const Direction& dir, std::string_view text,
                              std::string translation) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(key(dir, text), std::move(translation));
  if (inserted) {
    unflushed_.push_back(Entry{std::string(to_string(dir.src)), std::string(to_string(dir.dst)),
                               trim(text), it->second});
  }
  return inserted;
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void TranslationCache::load_jsonl(const std::string& path, bool require_exists) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (require_exists) throw TranslatorError("cannot open cache file " + path);
    return;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error&) {
      throw TranslatorError(path + " line " + std::to_string(lineno) + ": malformed cache entry");
    }
    if (!record.contains("src") || !record.contains("dst") || !record.contains("input") ||
        !record.contains("output")) {
      throw TranslatorError(path + " line " + std::to_string(lineno) +
                            ": cache entry missing src/dst/input/output");
    }
    const Direction dir(parse_lang(record["src"].get<std::string>()),
                        parse_lang(record["dst"].get<std::string>()));
    std::unique_lock lock(mutex_);
    entries_.emplace(key(dir, record["input"].get<std::string>()),
                     record["output"].get<std::string>());
  }
}

void TranslationCache::flush_jsonl(const std::string& path) {
  std::unique_lock lock(mutex_);
  if (unflushed_.empty()) return;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw TranslatorError("cannot append to cache file " + path);
  for (const Entry& e : unflushed_) {
    json record;
    record["src"] = e.src;
    record["dst"] = e.dst;
    record["input"] = e.input;
    record["output"] = e.output;
    out << record.dump() << '\n';
  }
  if (!out) throw TranslatorError("write failed for cache file " + path);
  unflushed_.clear();
}

std::vector<std::string> Translator::translate(const Direction& dir,
                                               std::span<const std::string> texts) {
  for (const std::string& text : texts) {
    if (is_blank(text)) throw TranslatorError("translate: empty text");
  }
  std::vector<std::string> out = do_translate(dir, texts);
  if (out.size() != texts.size()) {
    std::ostringstream msg;
    msg << "translator returned " << out.size() << " results for " << texts.size() << " inputs";
    throw TranslatorError(msg.str());
  }
  sentences_ += texts.size();
  batches_ += 1;
  return out;
}

LexiconTranslator::LexiconTranslator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TranslatorError("cannot open lexicon " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line[0] == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw TranslatorError(path + " line " + std::to_string(lineno) +
                            ": expected two tab-separated columns");
    }
    entries.emplace_back(trim(fields[0]), trim(fields[1]));
  }
  build(entries);
}

LexiconTranslator::LexiconTranslator(const std::vector<std::pair<std::string, std::string>>& en_vi) {
  build(en_vi);
}

void LexiconTranslator::build(const std::vector<std::pair<std::string, std::string>>& en_vi) {
  for (const auto& [en, vi] : en_vi) {
    add_entry(en, vi, en_to_vi_);
    add_entry(vi, en, vi_to_en_);
  }
  for (Table* table : {&en_to_vi_, &vi_to_en_}) {
    for (auto& [first, candidates] : table->by_first) {
      std::stable_sort(candidates.begin(), candidates.end(),
                       [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    }
  }
}

void LexiconTranslator::add_entry(const std::string& src, const std::string& dst, Table& table) {
  std::vector<std::string> tokens = ws_tokens(src);
  if (tokens.empty()) return;
  table.max_len = std::max(table.max_len, tokens.size());
  table.by_first[tokens[0]].emplace_back(std::move(tokens), dst);
}

std::string LexiconTranslator::apply(const Table& table, const std::string& text) {
  const std::vector<std::string> tokens = ws_tokens(text);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto it = table.by_first.find(tokens[i]);
    bool matched = false;
    if (it != table.by_first.end()) {
      for (const auto& [key_tokens, replacement] : it->second) {
        if (i + key_tokens.size() > tokens.size()) continue;
        bool equal = true;
        for (std::size_t k = 1; k < key_tokens.size() && equal; ++k) {
          equal = tokens[i + k] == key_tokens[k];
        }
        if (equal) {
          out.push_back(replacement);
          i += key_tokens.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return join(out);
}

std::vector<std::string> LexiconTranslator::do_translate(const Direction& dir,
                                                         std::span<const std::string> texts) {
  const Table& table = dir.src == Lang::en ? en_to_vi_ : vi_to_en_;
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) out.push_back(apply(table, text));
  return out;
}

std::vector<std::string> CacheTranslator::do_translate(const Direction& dir,
                                                       std::span<const std::string> texts) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    auto hit = cache_->lookup(dir, text);
    if (!hit) {
      if (strict_) {
        throw TranslatorError("cache miss (" + dir.str() + "): \"" + trim(text) + "\"");
      }
      out.push_back(trim(text));
    } else {
      out.push_back(std::move(*hit));
    }
  }
  return out;
}

RemoteTranslator::RemoteTranslator(RemoteConfig config) : config_(std::move(config)) {
  if (config_.max_batch < 1) throw TranslatorError("remote backend: max_batch must be >= 1");
  if (config_.retries < 0) throw TranslatorError("remote backend: retries must be >= 0");
  if (config_.concurrency < 1) config_.concurrency = 1;
}

std::vector<std::string> RemoteTranslator::translate_batch(const Direction& dir,
                                                           std::span<const std::string> texts) {
  json body;
  body["source_lang"] = std::string(to_string(dir.src));
  body["target_lang"] = std::string(to_string(dir.dst));
  body["texts"] = std::vector<std::string>(texts.begin(), texts.end());

  const json reply = post_json(config_.endpoint, "/translate", body, config_.timeout_s,
                               config_.retries, config_.backoff_ms);
  if (!reply.contains("translations") || !reply["translations"].is_array()) {
    throw TranslatorError("remote reply missing 'translations' array");
  }
  auto translations = reply["translations"].get<std::vector<std::string>>();
  if (translations.size() != texts.size()) {
    std::ostringstream msg;
    msg << "remote returned " << translations.size() << " translations for " << texts.size()
        << " texts";
    throw TranslatorError(msg.str());
  }
  return translations;
}

std::vector<std::string> RemoteTranslator::do_translate(const Direction& dir,
                                                        std::span<const std::string> texts) {
  const std::size_t batch = static_cast<std::size_t>(config_.max_batch);
  const std::size_t nbatches = (texts.size() + batch - 1) / batch;
  std::vector<std::vector<std::string>> results(nbatches);
  parallel_for(nbatches, config_.concurrency, [&](std::size_t b) {
    const std::size_t begin = b * batch;
    const std::size_t count = std::min(batch, texts.size() - begin);
    results[b] = translate_batch(dir, texts.subspan(begin, count));
  });
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (auto& chunk : results) {
    for (auto& text : chunk) out.push_back(std::move(text));
  }
  return out;
}

std::vector<std::string> CachedTranslator::do_translate(const Direction& dir,
                                                        std::span<const std::string> texts) {
  std::vector<std::string> out(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_at;
  std::unordered_map<std::string, std::size_t> missing_index;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto hit = cache_->lookup(dir, texts[i])) {
      out[i] = std::move(*hit);
      continue;
    }
    const std::string trimmed = trim(texts[i]);
    if (missing_index.emplace(trimmed, missing.size()).second) {
      missing.push_back(trimmed);
    }
    missing_at.push_back(i);
  }
  if (!missing.empty()) {
    const std::vector<std::string> translated = inner_->translate(dir, missing);
    for (std::size_t k = 0; k < missing.size(); ++k) {
      cache_->insert(dir, missing[k], translated[k]);
    }
    for (std::size_t i : missing_at) {
      out[i] = *cache_->lookup(dir, texts[i]);
    }
  }
  return out;
}

std::unique_ptr<Translator> make_translator(const BackendSpec& spec) {
  if (const auto* lex = std::get_if<LexiconBackend>(&spec)) {
    return std::make_unique<LexiconTranslator>(lex->path);
  }
  if (const auto* cache_spec = std::get_if<CacheBackend>(&spec)) {
    auto cache = std::make_shared<TranslationCache>();
    cache->load_jsonl(cache_spec->path, /*require_exists=*/true);
    return std::make_unique<CacheTranslator>(std::move(cache), cache_spec->strict);
  }
  return std::make_unique<RemoteTranslator>(std::get<RemoteBackend>(spec).config);
}

WarmStats warm_cache(Translator& backend, const Direction& dir,
                     std::span<const std::string> sentences, TranslationCache& cache) {
  WarmStats stats;
  stats.requested = sentences.size();
  std::vector<std::string> todo;
  std::unordered_map<std::string, bool> seen;
  for (const std::string& sentence : sentences) {
    const std::string trimmed = trim(sentence);
    if (!seen.emplace(trimmed, true).second) continue;
    ++stats.unique;
    if (cache.contains(dir, trimmed)) {
      ++stats.already_cached;
      continue;
    }
    todo.push_back(trimmed);
  }
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < todo.size(); begin += kChunk) {
    const std::size_t count = std::min(kChunk, todo.size() - begin);
    const std::span<const std::string> chunk(todo.data() + begin, count);
    // Insert per completed chunk so a failure keeps earlier progress.
    const std::vector<std::string> translated = backend.translate(dir, chunk);
    for (std::size_t k = 0; k < count; ++k) {
      cache.insert(dir, chunk[k], translated[k]);
      ++stats.translated;
    }
  }
  return stats;
}

}  // namespace btk
