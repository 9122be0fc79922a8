#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btk/util.hpp"

namespace btk {

class BleuError : public Error {
 public:
  using Error::Error;
};

enum class TokenizerKind { whitespace, intl };

struct Smoothing {
  enum class Kind { none, add_k };
  Kind kind = Kind::none;
  double k = 1.0;

  static Smoothing none() { return {Kind::none, 0.0}; }
  static Smoothing add_k(double k) { return {Kind::add_k, k}; }
};

// Smoothing is left unset by default: sentence_bleu resolves it to add_k(1),
// corpus_bleu to none.
struct BleuConfig {
  int max_n = 4;
  bool case_sensitive = true;
  TokenizerKind tokenizer = TokenizerKind::intl;
  std::optional<Smoothing> smoothing;
};

// score = 100 * brevity_penalty * geometric mean of the precisions. Orders
// with no hypothesis n-grams at all (and no smoothing to define them) are
// excluded from the mean so identity text scores 100 at any length; their
// precision reports as 0.
struct BleuBreakdown {
  double score = 0.0;                // [0, 100]
  std::vector<double> precisions;    // max_n entries, each in [0, 1]
  double brevity_penalty = 1.0;      // (0, 1]
  long hyp_len = 0;
  long ref_len = 0;
};

TokenizerKind parse_tokenizer(std::string_view name);
// Accepts "none", "add_k" (k = 1) or "add_k:<k>"; "add-k" works too.
Smoothing parse_smoothing(std::string_view name);

// whitespace mode splits on Unicode whitespace runs; intl mode additionally
// emits every punctuation character as its own token. Lowercasing applies
// only when case_sensitive is false.
std::vector<std::string> tokenize(std::string_view text, const BleuConfig& config);

BleuBreakdown sentence_bleu(std::string_view hyp, std::string_view ref, const BleuConfig& config);

BleuBreakdown corpus_bleu(std::span<const std::string> hyps, std::span<const std::string> refs,
                          const BleuConfig& config);

}  // namespace btk
