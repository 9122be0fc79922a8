#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "btk/bleu.hpp"
#include "btk/util.hpp"

namespace btk {

class CorpusError : public Error {
 public:
  using Error::Error;
};

enum class Lang { en, vi };

std::string_view to_string(Lang lang);
Lang parse_lang(std::string_view text);

struct DomainTag {
  enum class Kind { law, religion, news, medical, ted, subtitles, software, wiki, other };

  Kind kind = Kind::other;
  std::string raw;  // set only for Kind::other

  DomainTag() : raw("other") {}
  explicit DomainTag(Kind k) : kind(k) {}

  std::string str() const;
  // Unknown names map to other(raw) rather than failing.
  static DomainTag parse(std::string_view text);

  friend bool operator==(const DomainTag& a, const DomainTag& b) {
    return a.kind == b.kind && (a.kind != Kind::other || a.raw == b.raw);
  }
  friend bool operator<(const DomainTag& a, const DomainTag& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.kind == Kind::other && a.raw < b.raw;
  }
};

struct Sentence {
  std::string text;
  Lang lang = Lang::en;
};

struct Document {
  std::vector<Sentence> sentences;
  std::string source_id;
  DomainTag domain;
  Lang lang = Lang::en;

  // Rejects sentences that are blank after trimming or in the wrong language.
  void append(Sentence sentence);
  std::size_t size() const { return sentences.size(); }
};

struct DocumentPair {
  Document doc_en;
  Document doc_vi;
  std::string pair_id;

  DocumentPair() = default;
  DocumentPair(Document en, Document vi, std::string id);
};

struct SentencePair {
  Sentence en;
  Sentence vi;
  DomainTag domain;
  int tier = 1;
  std::string source_id;
  std::optional<double> score;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

bool same_pair(const SentencePair& a, const SentencePair& b);

struct Corpus {
  std::vector<SentencePair> pairs;
  std::string name;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

enum class CorpusFormat { line_pair, tsv, jsonl };

CorpusFormat parse_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

struct IngestReport {
  std::size_t records_read = 0;
  std::size_t pairs_ingested = 0;
  std::size_t dropped_blank = 0;  // records dropped because a side trimmed to empty
};

// For line_pair format, `path` may be the shared basename or either of the
// .en/.vi files. Per-record domain/tier override the defaults when present.
Corpus ingest(const std::string& path, CorpusFormat format, const DomainTag& default_domain,
              int default_tier, IngestReport* report = nullptr);

// jsonl round-trips every field including unknown extras; line_pair keeps
// only the text; tsv keeps text, domain, and tier.
void export_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format);

Corpus merge(const std::vector<Corpus>& corpora);

struct StatsReport {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_domain;
  std::map<int, std::size_t> per_tier;
  std::uint64_t tokens_en = 0;
  std::uint64_t tokens_vi = 0;
  std::map<std::size_t, std::size_t> length_hist_en;
  std::map<std::size_t, std::size_t> length_hist_vi;

  nlohmann::ordered_json to_json() const;
};

StatsReport stats(const Corpus& corpus, const BleuConfig& tokenizer_config = {});

struct SampleSplit {
  Corpus test;
  Corpus remainder;
};

// Uniform without replacement per domain; deterministic in `seed`. Both
// outputs preserve the original corpus order.
SampleSplit sample_test_set(const Corpus& corpus, const std::map<DomainTag, std::size_t>& per_domain,
                            std::uint64_t seed);

nlohmann::ordered_json pair_to_json(const SentencePair& pair);
SentencePair pair_from_json(const nlohmann::ordered_json& record, const DomainTag& default_domain,
                            int default_tier);

}  // namespace btk
