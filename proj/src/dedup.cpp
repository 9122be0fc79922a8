#include "btk/dedup.hpp"

#include <unordered_set>

#include "btk/unicode.hpp"

namespace btk {

namespace {

void collapse_whitespace(std::u32string& cps) {
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (unicode::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(cp);
  }
  cps = std::move(out);
}

struct KeySets {
  std::unordered_set<Hash128, Hash128Hasher> hashes;
  std::unordered_set<std::string> strings;
  bool paranoid = false;

  // Returns true when the key was newly added.
  bool add(const std::string& key) {
    if (paranoid) return strings.insert(key).second;
    return hashes.insert(murmur3_128(key)).second;
  }
  bool contains(const std::string& key) const {
    if (paranoid) return strings.count(key) > 0;
    return hashes.count(murmur3_128(key)) > 0;
  }
};

std::vector<std::string> keys_of(const Corpus& corpus, const NormalizationPolicy& policy,
                                 int workers) {
  std::vector<std::string> keys(corpus.size());
  parallel_for(corpus.size(), workers,
               [&](std::size_t i) { keys[i] = dedup_key(corpus.pairs[i], policy); });
  return keys;
}

}  // namespace

std::string normalize(std::string_view text, const NormalizationPolicy& policy) {
  std::u32string cps = utf8::decode(text);
  if (policy.unicode_canonical) cps = unicode::nfc(cps);
  if (policy.casefold) {
    for (char32_t& cp : cps) cp = unicode::simple_lower(cp);
  }
  if (policy.collapse_whitespace) collapse_whitespace(cps);
  if (policy.strip_punct) {
    std::u32string kept;
    kept.reserve(cps.size());
    for (char32_t cp : cps) {
      if (!unicode::is_punct(cp)) kept.push_back(cp);
    }
    cps = std::move(kept);
    if (policy.collapse_whitespace) collapse_whitespace(cps);
  }
  return utf8::encode(cps);
}

std::string dedup_key(const SentencePair& pair, const NormalizationPolicy& policy) {
  std::string key = normalize(pair.en.text, policy);
  key.push_back('\x1e');
  key += normalize(pair.vi.text, policy);
  return key;
}

nlohmann::ordered_json DedupReport::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input;
  j["kept"] = kept;
  j["removed_duplicates"] = removed_duplicates;
  j["removed_overlap"] = removed_overlap;
  j["removal_fraction"] = removal_fraction;
  return j;
}

std::pair<Corpus, DedupReport> dedup_within(const Corpus& corpus, const NormalizationPolicy& policy,
                                            const DedupOptions& options) {
  const std::vector<std::string> keys = keys_of(corpus, policy, options.workers);
  KeySets seen;
  seen.paranoid = options.paranoid;
  Corpus out;
  out.name = corpus.name;
  DedupReport report;
  report.input = corpus.size();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (seen.add(keys[i])) {
      out.pairs.push_back(corpus.pairs[i]);
    } else {
      ++report.removed_duplicates;
    }
  }
  report.kept = out.size();
  report.removal_fraction =
      report.input == 0 ? 0.0 : static_cast<double>(report.removed_duplicates) / report.input;
  return {std::move(out), report};
}

std::pair<Corpus, DedupReport> dedup_against(const Corpus& corpus_a, const Corpus& corpus_b,
                                             const NormalizationPolicy& policy,
                                             const DedupOptions& options) {
  const std::vector<std::string> b_keys = keys_of(corpus_b, policy, options.workers);
  KeySets reference;
  reference.paranoid = options.paranoid;
  for (const std::string& key : b_keys) reference.add(key);

  const std::vector<std::string> a_keys = keys_of(corpus_a, policy, options.workers);
  KeySets seen;
  seen.paranoid = options.paranoid;
  Corpus out;
  out.name = corpus_a.name;
  DedupReport report;
  report.input = corpus_a.size();
  for (std::size_t i = 0; i < corpus_a.size(); ++i) {
    if (!seen.add(a_keys[i])) {
      ++report.removed_duplicates;
      continue;
    }
    if (reference.contains(a_keys[i])) {
      ++report.removed_overlap;
      continue;
    }
    out.pairs.push_back(corpus_a.pairs[i]);
  }
  report.kept = out.size();
  report.removal_fraction =
      report.input == 0
          ? 0.0
          : static_cast<double>(report.removed_duplicates + report.removed_overlap) / report.input;
  return {std::move(out), report};
}

}  // namespace btk
