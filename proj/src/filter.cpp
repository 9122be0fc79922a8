#include "btk/filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "btk/aligner.hpp"
#include "btk/http.hpp"

namespace btk {

namespace {

using nlohmann::json;

std::unordered_map<std::size_t, double> load_checkpoint(const std::string& path) {
  std::unordered_map<std::size_t, double> scores;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error&) {
      throw FilterError(path + " line " + std::to_string(lineno) + ": malformed checkpoint entry");
    }
    if (!record.contains("index") || !record.contains("score")) {
      throw FilterError(path + " line " + std::to_string(lineno) +
                        ": checkpoint entry missing index/score");
    }
    scores[record["index"].get<std::size_t>()] = record["score"].get<double>();
  }
  return scores;
}

void append_checkpoint(const std::string& path, std::size_t begin,
                       std::span<const double> scores) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw FilterError("cannot append to checkpoint " + path);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    json record;
    record["index"] = begin + i;
    record["score"] = scores[i];
    out << record.dump() << '\n';
  }
}

void check_finite(double score, std::size_t index) {
  if (!std::isfinite(score)) {
    std::ostringstream msg;
    msg << "scorer returned a non-finite score for pair " << index;
    throw FilterError(msg.str());
  }
}

void score_remote(const Corpus& corpus, const RemoteLossScorer& scorer, Corpus& out,
                  const ScoreOptions& options) {
  std::unordered_map<std::size_t, double> done;
  if (options.checkpoint_path) done = load_checkpoint(*options.checkpoint_path);

  const std::size_t batch = static_cast<std::size_t>(std::max(1, scorer.batch));
  std::size_t begin = 0;
  while (begin < corpus.size()) {
    const std::size_t count = std::min(batch, corpus.size() - begin);
    bool all_done = true;
    for (std::size_t i = begin; i < begin + count && all_done; ++i) {
      all_done = done.count(i) > 0;
    }
    if (all_done) {
      for (std::size_t i = begin; i < begin + count; ++i) out.pairs[i].score = done[i];
      begin += count;
      continue;
    }
    json body;
    json pairs = json::array();
    for (std::size_t i = begin; i < begin + count; ++i) {
      pairs.push_back({{"en", corpus.pairs[i].en.text}, {"vi", corpus.pairs[i].vi.text}});
    }
    body["pairs"] = pairs;
    const json reply = post_json(scorer.endpoint, "/score", body, scorer.timeout_s, scorer.retries,
                                 scorer.backoff_ms);
    if (!reply.contains("losses") || !reply["losses"].is_array()) {
      throw FilterError("score reply missing 'losses' array");
    }
    std::vector<double> losses;
    try {
      losses = reply["losses"].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw FilterError("score reply: losses must be numbers");
    }
    if (losses.size() != count) {
      std::ostringstream msg;
      msg << "remote returned " << losses.size() << " losses for " << count << " pairs";
      throw FilterError(msg.str());
    }
    for (std::size_t k = 0; k < count; ++k) {
      check_finite(losses[k], begin + k);
      out.pairs[begin + k].score = losses[k];
    }
    if (options.checkpoint_path) append_checkpoint(*options.checkpoint_path, begin, losses);
    begin += count;
  }
}

void score_roundtrip(const Corpus& corpus, const RoundtripScorer& scorer, Corpus& out,
                     const ScoreOptions& options) {
  std::vector<double> scores(corpus.size(), 0.0);
  parallel_for(corpus.size(), options.workers, [&](std::size_t i) {
    scores[i] = pair_score(corpus.pairs[i].en, corpus.pairs[i].vi, *scorer.translator, scorer.bleu);
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    check_finite(scores[i], i);
    out.pairs[i].score = scores[i];
  }
  if (options.checkpoint_path) append_checkpoint(*options.checkpoint_path, 0, scores);
}

}  // namespace

Corpus score_corpus(const Corpus& corpus, const ScorerSpec& scorer, const ScoreOptions& options) {
  Corpus out = corpus;
  if (const auto* remote = std::get_if<RemoteLossScorer>(&scorer.variant)) {
    score_remote(corpus, *remote, out, options);
  } else {
    score_roundtrip(corpus, std::get<RoundtripScorer>(scorer.variant), out, options);
  }
  return out;
}

Corpus select_top_k(const Corpus& scored, std::size_t k, bool higher_is_better) {
  if (k > scored.size()) {
    std::ostringstream msg;
    msg << "select_top_k: k = " << k << " exceeds corpus size " << scored.size();
    throw FilterError(msg.str());
  }
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (!scored.pairs[i].score) {
      std::ostringstream msg;
      msg << "select_top_k: pair " << i << " has no score";
      throw FilterError(msg.str());
    }
  }
  const auto better = [&](std::size_t a, std::size_t b) {
    const double sa = *scored.pairs[a].score;
    const double sb = *scored.pairs[b].score;
    if (sa != sb) return higher_is_better ? sa > sb : sa < sb;
    return a < b;
  };
  std::vector<std::size_t> indices(scored.size());
  std::iota(indices.begin(), indices.end(), 0);
  if (k < indices.size()) {
    std::nth_element(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(k),
                     indices.end(), better);
    indices.resize(k);
  }
  std::sort(indices.begin(), indices.end());
  Corpus out;
  out.name = scored.name;
  out.pairs.reserve(k);
  for (std::size_t i : indices) out.pairs.push_back(scored.pairs[i]);
  return out;
}

nlohmann::ordered_json FilterReport::to_json() const {
  nlohmann::ordered_json j;
  j["k_candidates"] = k_candidates;
  j["metric_per_k"] = metric_per_k;
  j["chosen_k"] = chosen_k;
  if (threshold_score) {
    j["threshold_score"] = *threshold_score;
  } else {
    j["threshold_score"] = nullptr;
  }
  return j;
}

FilterReport tune_k(const Corpus& scored, const std::vector<std::size_t>& k_candidates,
                    const Evaluator& evaluator, bool higher_is_better) {
  if (k_candidates.empty()) throw FilterError("tune_k: no candidates");
  for (std::size_t k : k_candidates) {
    if (k > scored.size()) {
      std::ostringstream msg;
      msg << "tune_k: candidate k = " << k << " exceeds corpus size " << scored.size();
      throw FilterError(msg.str());
    }
  }
  FilterReport report;
  for (std::size_t k : k_candidates) {
    const Corpus candidate = select_top_k(scored, k, higher_is_better);
    double metric = 0.0;
    try {
      metric = evaluator(candidate);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "tune_k: evaluator failed for k = " << k << " (" << e.what() << ")";
      throw TuneError(msg.str(), report);
    }
    report.k_candidates.push_back(k);
    report.metric_per_k.push_back(metric);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < report.k_candidates.size(); ++i) {
    const double metric = report.metric_per_k[i];
    const double best_metric = report.metric_per_k[best];
    if (metric > best_metric ||
        (metric == best_metric && report.k_candidates[i] < report.k_candidates[best])) {
      best = i;
    }
  }
  report.chosen_k = report.k_candidates[best];
  if (report.chosen_k > 0) {
    const Corpus chosen = select_top_k(scored, report.chosen_k, higher_is_better);
    double worst = *chosen.pairs[0].score;
    for (const SentencePair& pair : chosen.pairs) {
      const double s = *pair.score;
      if (higher_is_better ? s < worst : s > worst) worst = s;
    }
    report.threshold_score = worst;
  }
  return report;
}

}  // namespace btk
