#include "btk/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace btk {

namespace {

using nlohmann::ordered_json;

const char* const kDomainNames[] = {"law", "religion",  "news",     "medical",
                                    "ted", "subtitles", "software", "wiki"};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// Accepts "base", "base.en" or "base.vi" and returns "base".
std::string line_pair_base(const std::string& path) {
  if (path.size() > 3 && (path.ends_with(".en") || path.ends_with(".vi"))) {
    return path.substr(0, path.size() - 3);
  }
  return path;
}

SentencePair make_pair(std::string en_text, std::string vi_text, const DomainTag& domain, int tier,
                       std::string source_id) {
  SentencePair pair;
  pair.en = Sentence{std::move(en_text), Lang::en};
  pair.vi = Sentence{std::move(vi_text), Lang::vi};
  pair.domain = domain;
  pair.tier = tier;
  pair.source_id = std::move(source_id);
  return pair;
}

void check_tier(int tier, const std::string& where) {
  if (tier < 1 || tier > 4) {
    std::ostringstream msg;
    msg << where << ": tier must be in 1..4, got " << tier;
    throw CorpusError(msg.str());
  }
}

Corpus ingest_line_pair(const std::string& path, const DomainTag& domain, int tier,
                        IngestReport& report) {
  const std::string base = line_pair_base(path);
  const std::string en_path = base + ".en";
  const std::string vi_path = base + ".vi";
  const auto en_lines = read_lines(en_path);
  const auto vi_lines = read_lines(vi_path);
  if (en_lines.size() != vi_lines.size()) {
    std::ostringstream msg;
    msg << "line-count mismatch: " << en_path << " has " << en_lines.size() << " lines, "
        << vi_path << " has " << vi_lines.size() << "; files diverge at line "
        << std::min(en_lines.size(), vi_lines.size()) + 1;
    throw CorpusError(msg.str());
  }
  Corpus corpus;
  corpus.name = stem_of(base);
  for (std::size_t i = 0; i < en_lines.size(); ++i) {
    ++report.records_read;
    std::string en = trim(en_lines[i]);
    std::string vi = trim(vi_lines[i]);
    if (en.empty() || vi.empty()) {
      ++report.dropped_blank;
      continue;
    }
    corpus.pairs.push_back(make_pair(std::move(en), std::move(vi), domain, tier, corpus.name));
  }
  return corpus;
}

bool looks_like_tsv_header(const std::vector<std::string>& fields) {
  if (fields.size() < 2) return false;
  const auto lc = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  return lc(trim(fields[0])) == "en" && lc(trim(fields[1])) == "vi";
}

Corpus ingest_tsv(const std::string& path, const DomainTag& default_domain, int default_tier,
                  IngestReport& report) {
  const auto lines = read_lines(path);
  Corpus corpus;
  corpus.name = stem_of(path);
  std::size_t start = 0;
  if (!lines.empty() && looks_like_tsv_header(split(lines[0], '\t'))) start = 1;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++report.records_read;
    const auto fields = split(lines[i], '\t');
    if (fields.size() < 2) {
      std::ostringstream msg;
      msg << path << " line " << i + 1 << ": expected at least 2 tab-separated fields, got "
          << fields.size();
      throw CorpusError(msg.str());
    }
    std::string en = trim(fields[0]);
    std::string vi = trim(fields[1]);
    if (en.empty() || vi.empty()) {
      ++report.dropped_blank;
      continue;
    }
    DomainTag domain = default_domain;
    if (fields.size() >= 3 && !trim(fields[2]).empty()) domain = DomainTag::parse(trim(fields[2]));
    int tier = default_tier;
    if (fields.size() >= 4 && !trim(fields[3]).empty()) {
      try {
        tier = std::stoi(trim(fields[3]));
      } catch (const std::exception&) {
        std::ostringstream msg;
        msg << path << " line " << i + 1 << ": malformed tier '" << fields[3] << "'";
        throw CorpusError(msg.str());
      }
    }
    check_tier(tier, path + " line " + std::to_string(i + 1));
    corpus.pairs.push_back(make_pair(std::move(en), std::move(vi), domain, tier, corpus.name));
  }
  return corpus;
}

Corpus ingest_jsonl(const std::string& path, const DomainTag& default_domain, int default_tier,
                    IngestReport& report) {
  const auto lines = read_lines(path);
  Corpus corpus;
  corpus.name = stem_of(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    ++report.records_read;
    ordered_json record;
    try {
      record = ordered_json::parse(lines[i]);
    } catch (const ordered_json::parse_error& e) {
      std::ostringstream msg;
      msg << path << " line " << i + 1 << ": malformed JSON (" << e.what() << ")";
      throw CorpusError(msg.str());
    }
    SentencePair pair;
    try {
      pair = pair_from_json(record, default_domain, default_tier);
    } catch (const CorpusError& e) {
      std::ostringstream msg;
      msg << path << " line " << i + 1 << ": " << e.what();
      throw CorpusError(msg.str());
    }
    if (pair.en.text.empty() || pair.vi.text.empty()) {
      ++report.dropped_blank;
      continue;
    }
    if (pair.source_id.empty()) pair.source_id = corpus.name;
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path);
  out << contents;
  if (!out) throw CorpusError("write failed for " + path);
}

}  // namespace

std::string_view to_string(Lang lang) { return lang == Lang::en ? "en" : "vi"; }

Lang parse_lang(std::string_view text) {
  if (text == "en") return Lang::en;
  if (text == "vi") return Lang::vi;
  throw CorpusError("unsupported language tag '" + std::string(text) + "' (expected en or vi)");
}

std::string DomainTag::str() const {
  if (kind == Kind::other) return raw.empty() ? "other" : raw;
  return kDomainNames[static_cast<int>(kind)];
}

DomainTag DomainTag::parse(std::string_view text) {
  for (int i = 0; i < 8; ++i) {
    if (text == kDomainNames[i]) return DomainTag(static_cast<Kind>(i));
  }
  DomainTag tag;
  tag.raw = std::string(text);
  return tag;
}

void Document::append(Sentence sentence) {
  if (sentence.lang != lang) {
    throw CorpusError("document " + source_id + ": mixed languages");
  }
  sentence.text = trim(sentence.text);
  if (sentence.text.empty()) {
    throw CorpusError("document " + source_id + ": blank sentence");
  }
  sentences.push_back(std::move(sentence));
}

DocumentPair::DocumentPair(Document en, Document vi, std::string id)
    : doc_en(std::move(en)), doc_vi(std::move(vi)), pair_id(std::move(id)) {
  if (doc_en.lang != Lang::en || doc_vi.lang != Lang::vi) {
    throw CorpusError("document pair " + pair_id + ": language mismatch");
  }
}

bool same_pair(const SentencePair& a, const SentencePair& b) {
  return a.en.text == b.en.text && a.vi.text == b.vi.text && a.domain == b.domain &&
         a.tier == b.tier && a.source_id == b.source_id && a.score == b.score && a.extra == b.extra;
}

CorpusFormat parse_format(std::string_view name) {
  if (name == "line-pair" || name == "line_pair") return CorpusFormat::line_pair;
  if (name == "tsv") return CorpusFormat::tsv;
  if (name == "jsonl") return CorpusFormat::jsonl;
  throw CorpusError("unknown corpus format '" + std::string(name) + "'");
}

std::string_view to_string(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::line_pair: return "line-pair";
    case CorpusFormat::tsv: return "tsv";
    case CorpusFormat::jsonl: return "jsonl";
  }
  return "?";
}

nlohmann::ordered_json pair_to_json(const SentencePair& pair) {
  ordered_json record;
  record["en"] = pair.en.text;
  record["vi"] = pair.vi.text;
  record["domain"] = pair.domain.str();
  record["tier"] = pair.tier;
  record["source"] = pair.source_id;
  if (pair.score) record["score"] = *pair.score;
  for (const auto& [key, value] : pair.extra.items()) record[key] = value;
  return record;
}

SentencePair pair_from_json(const ordered_json& record, const DomainTag& default_domain,
                            int default_tier) {
  if (!record.is_object()) throw CorpusError("record is not a JSON object");
  if (!record.contains("en") || !record["en"].is_string()) {
    throw CorpusError("missing string field 'en'");
  }
  if (!record.contains("vi") || !record["vi"].is_string()) {
    throw CorpusError("missing string field 'vi'");
  }
  SentencePair pair;
  pair.en = Sentence{trim(record["en"].get<std::string>()), Lang::en};
  pair.vi = Sentence{trim(record["vi"].get<std::string>()), Lang::vi};
  pair.domain = default_domain;
  pair.tier = default_tier;
  for (const auto& [key, value] : record.items()) {
    if (key == "en" || key == "vi") continue;
    if (key == "domain") {
      if (!value.is_string()) throw CorpusError("field 'domain' must be a string");
      pair.domain = DomainTag::parse(value.get<std::string>());
    } else if (key == "tier") {
      if (!value.is_number_integer()) throw CorpusError("field 'tier' must be an integer");
      pair.tier = value.get<int>();
    } else if (key == "source") {
      if (!value.is_string()) throw CorpusError("field 'source' must be a string");
      pair.source_id = value.get<std::string>();
    } else if (key == "score") {
      if (!value.is_number()) throw CorpusError("field 'score' must be a number");
      const double score = value.get<double>();
      if (!std::isfinite(score)) throw CorpusError("field 'score' must be finite");
      pair.score = score;
    } else {
      pair.extra[key] = value;
    }
  }
  check_tier(pair.tier, "record");
  return pair;
}

Corpus ingest(const std::string& path, CorpusFormat format, const DomainTag& default_domain,
              int default_tier, IngestReport* report) {
  check_tier(default_tier, "ingest(" + path + ")");
  IngestReport local;
  IngestReport& r = report ? *report : local;
  Corpus corpus;
  switch (format) {
    case CorpusFormat::line_pair:
      corpus = ingest_line_pair(path, default_domain, default_tier, r);
      break;
    case CorpusFormat::tsv:
      corpus = ingest_tsv(path, default_domain, default_tier, r);
      break;
    case CorpusFormat::jsonl:
      corpus = ingest_jsonl(path, default_domain, default_tier, r);
      break;
  }
  r.pairs_ingested = corpus.size();
  return corpus;
}

void export_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::jsonl: {
      std::string out;
      for (const SentencePair& pair : corpus.pairs) {
        out += pair_to_json(pair).dump();
        out += '\n';
      }
      write_file(path, out);
      return;
    }
    case CorpusFormat::line_pair: {
      const std::string base = line_pair_base(path);
      std::string en, vi;
      for (const SentencePair& pair : corpus.pairs) {
        en += pair.en.text;
        en += '\n';
        vi += pair.vi.text;
        vi += '\n';
      }
      write_file(base + ".en", en);
      write_file(base + ".vi", vi);
      return;
    }
    case CorpusFormat::tsv: {
      std::string out = "en\tvi\tdomain\ttier\n";
      for (const SentencePair& pair : corpus.pairs) {
        if (pair.en.text.find('\t') != std::string::npos ||
            pair.vi.text.find('\t') != std::string::npos) {
          throw CorpusError("tsv export: sentence text contains a tab");
        }
        out += pair.en.text;
        out += '\t';
        out += pair.vi.text;
        out += '\t';
        out += pair.domain.str();
        out += '\t';
        out += std::to_string(pair.tier);
        out += '\n';
      }
      write_file(path, out);
      return;
    }
  }
}

Corpus merge(const std::vector<Corpus>& corpora) {
  Corpus out;
  out.name = "merged";
  std::size_t total = 0;
  for (const Corpus& c : corpora) total += c.size();
  out.pairs.reserve(total);
  for (const Corpus& c : corpora) {
    out.pairs.insert(out.pairs.end(), c.pairs.begin(), c.pairs.end());
  }
  return out;
}

StatsReport stats(const Corpus& corpus, const BleuConfig& tokenizer_config) {
  StatsReport report;
  report.total = corpus.size();
  for (const SentencePair& pair : corpus.pairs) {
    ++report.per_domain[pair.domain.str()];
    ++report.per_tier[pair.tier];
    const auto en_tokens = tokenize(pair.en.text, tokenizer_config);
    const auto vi_tokens = tokenize(pair.vi.text, tokenizer_config);
    report.tokens_en += en_tokens.size();
    report.tokens_vi += vi_tokens.size();
    ++report.length_hist_en[en_tokens.size()];
    ++report.length_hist_vi[vi_tokens.size()];
  }
  return report;
}

nlohmann::ordered_json StatsReport::to_json() const {
  ordered_json j;
  j["total"] = total;
  ordered_json domains = ordered_json::object();
  for (const auto& [domain, count] : per_domain) domains[domain] = count;
  j["per_domain"] = domains;
  ordered_json tiers = ordered_json::object();
  for (const auto& [tier, count] : per_tier) tiers[std::to_string(tier)] = count;
  j["per_tier"] = tiers;
  j["tokens_en"] = tokens_en;
  j["tokens_vi"] = tokens_vi;
  ordered_json hist_en = ordered_json::object();
  for (const auto& [len, count] : length_hist_en) hist_en[std::to_string(len)] = count;
  j["length_hist_en"] = hist_en;
  ordered_json hist_vi = ordered_json::object();
  for (const auto& [len, count] : length_hist_vi) hist_vi[std::to_string(len)] = count;
  j["length_hist_vi"] = hist_vi;
  return j;
}

SampleSplit sample_test_set(const Corpus& corpus, const std::map<DomainTag, std::size_t>& per_domain,
                            std::uint64_t seed) {
  std::map<DomainTag, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    by_domain[corpus.pairs[i].domain].push_back(i);
  }
  std::vector<bool> in_test(corpus.size(), false);
  std::mt19937_64 rng(seed);
  for (const auto& [domain, want] : per_domain) {
    auto it = by_domain.find(domain);
    const std::size_t have = it == by_domain.end() ? 0 : it->second.size();
    if (want > have) {
      std::ostringstream msg;
      msg << "sample_test_set: domain '" << domain.str() << "' has " << have
          << " pairs, requested " << want << " (shortfall " << want - have << ")";
      throw CorpusError(msg.str());
    }
    if (want == 0) continue;
    std::vector<std::size_t> indices = it->second;
    deterministic_shuffle(indices, rng);
    for (std::size_t k = 0; k < want; ++k) in_test[indices[k]] = true;
  }
  SampleSplit split;
  split.test.name = corpus.name + ".test";
  split.remainder.name = corpus.name + ".remainder";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_test[i] ? split.test : split.remainder).pairs.push_back(corpus.pairs[i]);
  }
  return split;
}

}  // namespace btk
