#include "btk/aligner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace btk {

namespace {

bool in_band(std::size_t m, std::size_t n, const std::optional<std::size_t>& band) {
  if (!band) return true;
  const std::size_t lo = std::min(m, n);
  const std::size_t hi = std::max(m, n);
  return hi - lo <= *band;
}

}  // namespace

double pair_score(const Sentence& en, const Sentence& vi, Translator& translator,
                  const BleuConfig& bleu) {
  const std::vector<std::string> vi_text{vi.text};
  const std::vector<std::string> en_text{en.text};
  const std::string vi_as_en = translator.translate(Direction::vi_to_en(), vi_text)[0];
  const std::string en_as_vi = translator.translate(Direction::en_to_vi(), en_text)[0];
  return sentence_bleu(en.text, vi_as_en, bleu).score + sentence_bleu(en_as_vi, vi.text, bleu).score;
}

AlignmentResult align_with_scores(std::size_t en_count, std::size_t vi_count,
                                  const std::function<double(std::size_t, std::size_t)>& score,
                                  double min_pair_score,
                                  std::optional<std::size_t> band_width) {
  if (min_pair_score < 0) throw AlignError("min_pair_score must be >= 0");
  const std::size_t M = en_count;
  const std::size_t N = vi_count;
  std::vector<double> dp((M + 1) * (N + 1), 0.0);
  const auto at = [&](std::size_t m, std::size_t n) -> double& { return dp[m * (N + 1) + n]; };

  for (std::size_t m = 1; m <= M; ++m) {
    for (std::size_t n = 1; n <= N; ++n) {
      double best = std::max(at(m - 1, n), at(m, n - 1));
      if (in_band(m, n, band_width)) {
        const double s = score(m - 1, n - 1);
        if (s >= min_pair_score) best = std::max(best, at(m - 1, n - 1) + s);
      }
      at(m, n) = best;
    }
  }

  // Backtrace to (0, 0), re-deriving the winning transition per cell. Exact
  // float comparison: both sides are the same deterministic computation.
  // Ties resolve match first, then skip_vi, then skip_en; a match that adds
  // exactly zero is skipped instead of emitted.
  AlignmentResult result;
  result.total_score = at(M, N);
  std::size_t m = M;
  std::size_t n = N;
  while (m > 0 || n > 0) {
    if (m > 0 && n > 0 && in_band(m, n, band_width)) {
      const double s = score(m - 1, n - 1);
      if (s >= min_pair_score && s > 0.0 && at(m, n) == at(m - 1, n - 1) + s) {
        result.matches.push_back(Match{m - 1, n - 1, s});
        --m;
        --n;
        continue;
      }
    }
    if (n > 0 && at(m, n) == at(m, n - 1)) {
      result.skipped_vi.push_back(n - 1);
      --n;
      continue;
    }
    result.skipped_en.push_back(m - 1);
    --m;
  }
  std::reverse(result.matches.begin(), result.matches.end());
  std::reverse(result.skipped_en.begin(), result.skipped_en.end());
  std::reverse(result.skipped_vi.begin(), result.skipped_vi.end());
  return result;
}

AlignmentResult align_documents(const DocumentPair& pair, CachedTranslator& translator,
                                const AlignConfig& config) {
  const std::size_t M = pair.doc_en.size();
  const std::size_t N = pair.doc_vi.size();
  if (M > config.max_sentences || N > config.max_sentences) {
    std::ostringstream msg;
    msg << "document pair " << pair.pair_id << " has " << M << "x" << N
        << " sentences, above the limit of " << config.max_sentences
        << "; pre-split the documents";
    throw AlignError(msg.str());
  }

  // Pre-warm both directions so the O(M·N) scoring pass never reaches the
  // backend: at most M + N backend sentences per document pair.
  std::vector<std::string> en_texts;
  en_texts.reserve(M);
  for (const Sentence& s : pair.doc_en.sentences) en_texts.push_back(s.text);
  std::vector<std::string> vi_texts;
  vi_texts.reserve(N);
  for (const Sentence& s : pair.doc_vi.sentences) vi_texts.push_back(s.text);
  if (!en_texts.empty()) translator.translate(Direction::en_to_vi(), en_texts);
  if (!vi_texts.empty()) translator.translate(Direction::vi_to_en(), vi_texts);

  const auto score = [&](std::size_t i, std::size_t j) {
    return pair_score(pair.doc_en.sentences[i], pair.doc_vi.sentences[j], translator, config.bleu);
  };
  return align_with_scores(M, N, score, config.min_pair_score, config.band_width);
}

Corpus matches_to_corpus(const DocumentPair& pair, const AlignmentResult& result) {
  Corpus corpus;
  corpus.name = pair.pair_id;
  corpus.pairs.reserve(result.matches.size());
  for (const Match& match : result.matches) {
    SentencePair sp;
    sp.en = pair.doc_en.sentences[match.en_index];
    sp.vi = pair.doc_vi.sentences[match.vi_index];
    sp.domain = pair.doc_en.domain;
    sp.tier = 3;
    sp.source_id = pair.pair_id;
    sp.score = match.score;
    corpus.pairs.push_back(std::move(sp));
  }
  return corpus;
}

nlohmann::ordered_json BatchReport::to_json(std::span<const DocOutcome> outcomes) const {
  nlohmann::ordered_json j;
  j["documents"] = documents;
  j["failed"] = failed;
  j["total_matches"] = total_matches;
  j["backend_sentences"] = backend_sentences;
  j["backend_batches"] = backend_batches;
  nlohmann::ordered_json docs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const DocOutcome& outcome = outcomes[i];
    nlohmann::ordered_json d;
    d["pair_id"] = outcome.pair_id;
    d["en_sentences"] = outcome.en_size;
    d["vi_sentences"] = outcome.vi_size;
    if (outcome.result) {
      d["matches"] = outcome.result->matches.size();
      d["skipped_en"] = outcome.result->skipped_en.size();
      d["skipped_vi"] = outcome.result->skipped_vi.size();
      d["total_score"] = outcome.result->total_score;
      d["match_rate"] = match_rates[i];
    } else {
      d["error"] = outcome.error;
    }
    docs.push_back(std::move(d));
  }
  j["per_document"] = docs;
  return j;
}

BatchResult align_batch(std::span<const DocumentPair> pairs, CachedTranslator& translator,
                        const AlignConfig& config, int workers) {
  if (workers < 1) throw AlignError("align_batch: workers must be >= 1");
  BatchResult batch;
  batch.outcomes.resize(pairs.size());
  const std::uint64_t sentences_before = translator.inner().sentences_translated();
  const std::uint64_t batches_before = translator.inner().batch_calls();

  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    DocOutcome& outcome = batch.outcomes[i];
    outcome.pair_id = pairs[i].pair_id;
    outcome.en_size = pairs[i].doc_en.size();
    outcome.vi_size = pairs[i].doc_vi.size();
    try {
      outcome.result = align_documents(pairs[i], translator, config);
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
  });

  BatchReport& report = batch.report;
  report.documents = pairs.size();
  report.backend_sentences = translator.inner().sentences_translated() - sentences_before;
  report.backend_batches = translator.inner().batch_calls() - batches_before;
  report.match_rates.resize(pairs.size(), 0.0);
  for (std::size_t i = 0; i < batch.outcomes.size(); ++i) {
    const DocOutcome& outcome = batch.outcomes[i];
    if (!outcome.result) {
      ++report.failed;
      continue;
    }
    report.total_matches += outcome.result->matches.size();
    const std::size_t denom = std::min(outcome.en_size, outcome.vi_size);
    report.match_rates[i] =
        denom == 0 ? 0.0 : static_cast<double>(outcome.result->matches.size()) / denom;
  }
  return batch;
}

Document load_document(const std::string& path, Lang lang, const DomainTag& domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AlignError("cannot open document " + path);
  Document doc;
  doc.lang = lang;
  doc.domain = domain;
  doc.source_id = path;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string text = trim(line);
    if (text.empty()) continue;
    doc.append(Sentence{text, lang});
  }
  return doc;
}

}  // namespace btk
