#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "btk/bleu.hpp"
#include "btk/corpus.hpp"
#include "btk/translator.hpp"

namespace btk {

class FilterError : public Error {
 public:
  using Error::Error;
};

struct RemoteLossScorer {
  std::string endpoint;
  int batch = 64;
  double timeout_s = 30.0;
  int retries = 3;
  int backoff_ms = 50;
};

struct RoundtripScorer {
  std::shared_ptr<Translator> translator;
  BleuConfig bleu;
};

struct ScorerSpec {
  std::variant<RemoteLossScorer, RoundtripScorer> variant;
  bool higher_is_better = true;

  static ScorerSpec remote_loss(RemoteLossScorer scorer) {
    return ScorerSpec{std::move(scorer), /*higher_is_better=*/false};
  }
  static ScorerSpec roundtrip_bleu(RoundtripScorer scorer) {
    return ScorerSpec{std::move(scorer), /*higher_is_better=*/true};
  }
};

struct ScoreOptions {
  // JSONL checkpoint {"index","score"}; existing entries are skipped on
  // resume and new ones appended after every chunk.
  std::optional<std::string> checkpoint_path;
  int workers = 1;
};

// Attaches a finite score to every pair, preserving order.
Corpus score_corpus(const Corpus& corpus, const ScorerSpec& scorer, const ScoreOptions& options = {});

// The k best pairs by score, ties broken by original position (earlier
// wins); output keeps the original relative order.
Corpus select_top_k(const Corpus& scored, std::size_t k, bool higher_is_better);

struct FilterReport {
  std::vector<std::size_t> k_candidates;
  std::vector<double> metric_per_k;
  std::size_t chosen_k = 0;
  std::optional<double> threshold_score;  // score of the K-th admitted pair

  nlohmann::ordered_json to_json() const;
};

class TuneError : public FilterError {
 public:
  TuneError(const std::string& msg, FilterReport partial_report)
      : FilterError(msg), partial(std::move(partial_report)) {}
  FilterReport partial;
};

using Evaluator = std::function<double(const Corpus&)>;

// Runs the evaluator once per candidate K on select_top_k output. chosen_k
// maximizes the metric; exact ties prefer the smaller K. An evaluator
// failure throws TuneError carrying the partial report.
FilterReport tune_k(const Corpus& scored, const std::vector<std::size_t>& k_candidates,
                    const Evaluator& evaluator, bool higher_is_better);

}  // namespace btk
