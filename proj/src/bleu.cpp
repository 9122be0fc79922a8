#include "btk/bleu.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "btk/unicode.hpp"

namespace btk {

namespace {

void validate(const BleuConfig& config) {
  if (config.max_n < 1) throw BleuError("BLEU config: max_n must be >= 1");
  if (config.smoothing && config.smoothing->kind == Smoothing::Kind::add_k &&
      !(config.smoothing->k > 0)) {
    throw BleuError("BLEU config: add_k smoothing requires k > 0");
  }
}

struct NgramCounts {
  // One map per order; key is the '\x1f'-joined token window.
  std::vector<std::unordered_map<std::string, int>> per_order;

  explicit NgramCounts(int max_n) : per_order(static_cast<std::size_t>(max_n)) {}
};

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int max_n) {
  NgramCounts counts(max_n);
  for (int n = 1; n <= max_n; ++n) {
    auto& map = counts.per_order[static_cast<std::size_t>(n - 1)];
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int j = 1; j < n; ++j) {
        key.push_back('\x1f');
        key.append(tokens[i + j]);
      }
      ++map[key];
    }
  }
  return counts;
}

struct PooledStats {
  std::vector<long> matches;  // clipped, per order
  std::vector<long> totals;   // hypothesis n-gram counts, per order
  long hyp_len = 0;
  long ref_len = 0;

  explicit PooledStats(int max_n)
      : matches(static_cast<std::size_t>(max_n), 0), totals(static_cast<std::size_t>(max_n), 0) {}
};

void accumulate(PooledStats& stats, std::string_view hyp, std::string_view ref,
                const BleuConfig& config) {
  const auto hyp_tokens = tokenize(hyp, config);
  const auto ref_tokens = tokenize(ref, config);
  stats.hyp_len += static_cast<long>(hyp_tokens.size());
  stats.ref_len += static_cast<long>(ref_tokens.size());

  const NgramCounts hyp_counts = count_ngrams(hyp_tokens, config.max_n);
  const NgramCounts ref_counts = count_ngrams(ref_tokens, config.max_n);
  for (int n = 1; n <= config.max_n; ++n) {
    const auto& hyp_map = hyp_counts.per_order[static_cast<std::size_t>(n - 1)];
    const auto& ref_map = ref_counts.per_order[static_cast<std::size_t>(n - 1)];
    long matched = 0;
    long total = 0;
    for (const auto& [ngram, count] : hyp_map) {
      total += count;
      const auto it = ref_map.find(ngram);
      if (it != ref_map.end()) matched += std::min(count, it->second);
    }
    stats.matches[static_cast<std::size_t>(n - 1)] += matched;
    stats.totals[static_cast<std::size_t>(n - 1)] += total;
  }
}

BleuBreakdown finish(const PooledStats& stats, const BleuConfig& config, Smoothing smoothing) {
  BleuBreakdown out;
  out.hyp_len = stats.hyp_len;
  out.ref_len = stats.ref_len;
  out.precisions.assign(static_cast<std::size_t>(config.max_n), 0.0);
  out.brevity_penalty = 1.0;

  if (stats.hyp_len == 0) {
    out.score = 0.0;
    return out;
  }
  if (stats.hyp_len < stats.ref_len) {
    out.brevity_penalty =
        std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.hyp_len));
  }

  // Orders with no hypothesis n-grams carry no evidence and are excluded
  // from the geometric mean (otherwise no short sentence could ever reach
  // 100 without smoothing). add_k keeps such orders, as k/k is defined.
  double log_sum = 0.0;
  int effective_orders = 0;
  bool zero_precision = false;
  for (int n = 1; n <= config.max_n; ++n) {
    double matched = static_cast<double>(stats.matches[static_cast<std::size_t>(n - 1)]);
    double total = static_cast<double>(stats.totals[static_cast<std::size_t>(n - 1)]);
    const bool smoothed = smoothing.kind == Smoothing::Kind::add_k && n >= 2;
    if (smoothed) {
      matched += smoothing.k;
      total += smoothing.k;
    }
    if (total <= 0) continue;
    const double p = matched / total;
    out.precisions[static_cast<std::size_t>(n - 1)] = p;
    ++effective_orders;
    if (p <= 0.0) {
      zero_precision = true;
    } else {
      log_sum += std::log(p);
    }
  }

  out.score = zero_precision || effective_orders == 0
                  ? 0.0
                  : 100.0 * out.brevity_penalty * std::exp(log_sum / effective_orders);
  return out;
}

}  // namespace

TokenizerKind parse_tokenizer(std::string_view name) {
  if (name == "whitespace" || name == "ws") return TokenizerKind::whitespace;
  if (name == "intl") return TokenizerKind::intl;
  throw BleuError("unknown tokenizer '" + std::string(name) + "' (expected whitespace or intl)");
}

Smoothing parse_smoothing(std::string_view name) {
  if (name == "none") return Smoothing::none();
  if (name == "add_k" || name == "add-k") return Smoothing::add_k(1.0);
  const std::string_view prefixes[] = {"add_k:", "add-k:"};
  for (std::string_view prefix : prefixes) {
    if (name.substr(0, prefix.size()) == prefix) {
      try {
        const double k = std::stod(std::string(name.substr(prefix.size())));
        return Smoothing::add_k(k);
      } catch (const std::exception&) {
        break;
      }
    }
  }
  throw BleuError("unknown smoothing '" + std::string(name) +
                  "' (expected none, add_k, or add_k:<k>)");
}

std::vector<std::string> tokenize(std::string_view text, const BleuConfig& config) {
  validate(config);
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char32_t cp : utf8::decode(text)) {
    if (!config.case_sensitive) cp = unicode::simple_lower(cp);
    if (unicode::is_space(cp)) {
      flush();
    } else if (config.tokenizer == TokenizerKind::intl && unicode::is_punct(cp)) {
      flush();
      std::string punct;
      utf8::append(punct, cp);
      tokens.push_back(std::move(punct));
    } else {
      utf8::append(current, cp);
    }
  }
  flush();
  return tokens;
}

BleuBreakdown sentence_bleu(std::string_view hyp, std::string_view ref, const BleuConfig& config) {
  validate(config);
  PooledStats stats(config.max_n);
  accumulate(stats, hyp, ref, config);
  return finish(stats, config, config.smoothing.value_or(Smoothing::add_k(1.0)));
}

BleuBreakdown corpus_bleu(std::span<const std::string> hyps, std::span<const std::string> refs,
                          const BleuConfig& config) {
  validate(config);
  if (hyps.size() != refs.size()) {
    std::ostringstream msg;
    msg << "corpus BLEU: hypothesis/reference count mismatch (" << hyps.size() << " vs "
        << refs.size() << ")";
    throw BleuError(msg.str());
  }
  if (hyps.empty()) throw BleuError("corpus BLEU: empty corpus");
  PooledStats stats(config.max_n);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    accumulate(stats, hyps[i], refs[i], config);
  }
  return finish(stats, config, config.smoothing.value_or(Smoothing::none()));
}

}  // namespace btk
