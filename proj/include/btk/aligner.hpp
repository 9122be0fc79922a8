#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "btk/bleu.hpp"
#include "btk/corpus.hpp"
#include "btk/translator.hpp"

namespace btk {

class AlignError : public Error {
 public:
  using Error::Error;
};

struct AlignConfig {
  BleuConfig bleu;
  // τ: candidate matches scoring below this are disallowed, which is what
  // strips noise sentences out of the alignment. Scale is 0..200.
  double min_pair_score = 10.0;
  // O(M·N) guard; longer documents must be pre-split.
  std::size_t max_sentences = 20000;
  // When set, the match transition is only considered for |m - n| <= band.
  std::optional<std::size_t> band_width;
};

struct Match {
  std::size_t en_index = 0;
  std::size_t vi_index = 0;
  double score = 0.0;
};

struct AlignmentResult {
  std::vector<Match> matches;  // strictly increasing in both indices
  std::vector<std::size_t> skipped_en;
  std::vector<std::size_t> skipped_vi;
  double total_score = 0.0;
};

// Bidirectional score s(e, v) = BLEU(e, t(v)) + BLEU(t(e), v), each term on
// the 0..100 scale. Route the translator through a CachedTranslator to keep
// backend calls at one per sentence per direction.
double pair_score(const Sentence& en, const Sentence& vi, Translator& translator,
                  const BleuConfig& bleu);

// DP core over an arbitrary score oracle, 0-based indices. Exposed so the
// recurrence can be checked against exhaustive enumeration.
AlignmentResult align_with_scores(
    std::size_t en_count, std::size_t vi_count,
    const std::function<double(std::size_t, std::size_t)>& score, double min_pair_score,
    std::optional<std::size_t> band_width = std::nullopt);

AlignmentResult align_documents(const DocumentPair& pair, CachedTranslator& translator,
                                const AlignConfig& config);

// Matched sentences as tier-3 pairs with the pair score attached.
Corpus matches_to_corpus(const DocumentPair& pair, const AlignmentResult& result);

struct DocOutcome {
  std::string pair_id;
  std::size_t en_size = 0;
  std::size_t vi_size = 0;
  std::optional<AlignmentResult> result;
  std::string error;  // empty on success
};

struct BatchReport {
  std::size_t documents = 0;
  std::size_t failed = 0;
  std::size_t total_matches = 0;
  std::uint64_t backend_sentences = 0;
  std::uint64_t backend_batches = 0;
  // match_rate = matches / min(en_size, vi_size), one entry per document
  std::vector<double> match_rates;

  nlohmann::ordered_json to_json(std::span<const DocOutcome> outcomes) const;
};

struct BatchResult {
  std::vector<DocOutcome> outcomes;  // input order
  BatchReport report;
  bool ok() const { return report.failed == 0; }
};

// Fail-soft: a document failure is recorded and the batch continues. Output
// is identical for any worker count.
BatchResult align_batch(std::span<const DocumentPair> pairs, CachedTranslator& translator,
                        const AlignConfig& config, int workers);

// One sentence per line; blank lines are dropped.
Document load_document(const std::string& path, Lang lang, const DomainTag& domain);

}  // namespace btk
