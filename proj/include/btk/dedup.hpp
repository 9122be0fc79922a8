#pragma once

#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "btk/corpus.hpp"

namespace btk {

struct NormalizationPolicy {
  bool unicode_canonical = true;
  bool casefold = true;
  bool collapse_whitespace = true;
  bool strip_punct = false;
};

// Applies, in order: canonical composition, case folding, whitespace-run
// collapse + trim, optional punctuation stripping (with a final whitespace
// tidy so the result stays idempotent).
std::string normalize(std::string_view text, const NormalizationPolicy& policy);

// Dedup key combining both sides, so identical English with different
// Vietnamese survives.
std::string dedup_key(const SentencePair& pair, const NormalizationPolicy& policy);

struct DedupOptions {
  // Compare full key strings instead of 128-bit fingerprints.
  bool paranoid = false;
  int workers = 1;
};

struct DedupReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t removed_duplicates = 0;
  std::size_t removed_overlap = 0;  // dedup_against only
  double removal_fraction = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Keeps the first occurrence of each normalized (en, vi) key.
std::pair<Corpus, DedupReport> dedup_within(const Corpus& corpus, const NormalizationPolicy& policy,
                                            const DedupOptions& options = {});

// Within-dedups corpus_a, then drops survivors whose key occurs in corpus_b.
std::pair<Corpus, DedupReport> dedup_against(const Corpus& corpus_a, const Corpus& corpus_b,
                                             const NormalizationPolicy& policy,
                                             const DedupOptions& options = {});

}  // namespace btk
