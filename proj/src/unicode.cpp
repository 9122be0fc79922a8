#include "btk/unicode.hpp"

#include <algorithm>
#include <cstdint>

#include "btk/unicode_tables.hpp"
#include "btk/util.hpp"

namespace btk::unicode {

namespace {

using detail::CompEntry;
using detail::CpByte;
using detail::CpPair;
using detail::CpRange;
using detail::DecompEntry;

bool in_ranges(const CpRange* ranges, std::size_t n, char32_t cp) {
  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cp < ranges[mid].lo) {
      hi = mid;
    } else if (cp > ranges[mid].hi) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}

int combining_class(char32_t cp) {
  std::size_t lo = 0, hi = detail::kCombiningClass_size;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::kCombiningClass[mid].cp < cp) {
      lo = mid + 1;
    } else if (detail::kCombiningClass[mid].cp > cp) {
      hi = mid;
    } else {
      return detail::kCombiningClass[mid].value;
    }
  }
  return 0;
}

const DecompEntry* find_decomposition(char32_t cp) {
  std::size_t lo = 0, hi = detail::kDecompIndex_size;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::kDecompIndex[mid].cp < cp) {
      lo = mid + 1;
    } else if (detail::kDecompIndex[mid].cp > cp) {
      hi = mid;
    } else {
      return &detail::kDecompIndex[mid];
    }
  }
  return nullptr;
}

char32_t compose_pair_table(char32_t a, char32_t b) {
  const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  std::size_t lo = 0, hi = detail::kCompPairs_size;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::kCompPairs[mid].key < key) {
      lo = mid + 1;
    } else if (detail::kCompPairs[mid].key > key) {
      hi = mid;
    } else {
      return detail::kCompPairs[mid].composed;
    }
  }
  return 0;
}

// Hangul syllable constants (UAX #15 section 3.12).
constexpr char32_t kSBase = 0xAC00;
constexpr char32_t kLBase = 0x1100;
constexpr char32_t kVBase = 0x1161;
constexpr char32_t kTBase = 0x11A7;
constexpr int kLCount = 19, kVCount = 21, kTCount = 28;
constexpr int kNCount = kVCount * kTCount;
constexpr int kSCount = kLCount * kNCount;

void decompose_hangul(char32_t cp, std::u32string& out) {
  const int index = static_cast<int>(cp - kSBase);
  out.push_back(kLBase + index / kNCount);
  out.push_back(kVBase + (index % kNCount) / kTCount);
  if (index % kTCount != 0) out.push_back(kTBase + index % kTCount);
}

char32_t compose_hangul(char32_t a, char32_t b) {
  if (a >= kLBase && a < kLBase + kLCount && b >= kVBase && b < kVBase + kVCount) {
    return kSBase + (static_cast<int>(a - kLBase) * kVCount + static_cast<int>(b - kVBase)) * kTCount;
  }
  if (a >= kSBase && a < kSBase + kSCount && (a - kSBase) % kTCount == 0 && b > kTBase &&
      b < kTBase + kTCount) {
    return a + (b - kTBase);
  }
  return 0;
}

char32_t compose_pair(char32_t a, char32_t b) {
  if (char32_t h = compose_hangul(a, b)) return h;
  return compose_pair_table(a, b);
}

void canonical_decompose(char32_t cp, std::u32string& out) {
  if (cp >= kSBase && cp < kSBase + kSCount) {
    decompose_hangul(cp, out);
    return;
  }
  if (const DecompEntry* entry = find_decomposition(cp)) {
    for (std::uint32_t i = 0; i < entry->length; ++i) {
      out.push_back(detail::kDecompData[entry->offset + i]);
    }
    return;
  }
  out.push_back(cp);
}

void canonical_reorder(std::u32string& text) {
  // Stable bubble pass over runs of nonzero combining class.
  for (std::size_t i = 1; i < text.size(); ++i) {
    const int cc = combining_class(text[i]);
    if (cc == 0) continue;
    std::size_t j = i;
    while (j > 0) {
      const int prev = combining_class(text[j - 1]);
      if (prev == 0 || prev <= cc) break;
      std::swap(text[j - 1], text[j]);
      --j;
    }
  }
}

}  // namespace

bool is_space(char32_t cp) {
  return in_ranges(detail::kWhitespaceRanges, detail::kWhitespaceRanges_size, cp);
}

bool is_punct(char32_t cp) {
  return in_ranges(detail::kPunctRanges, detail::kPunctRanges_size, cp);
}

char32_t simple_lower(char32_t cp) {
  std::size_t lo = 0, hi = detail::kLowerPairs_size;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (detail::kLowerPairs[mid].from < cp) {
      lo = mid + 1;
    } else if (detail::kLowerPairs[mid].from > cp) {
      hi = mid;
    } else {
      return detail::kLowerPairs[mid].to;
    }
  }
  return cp;
}

std::string lower(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  for (char32_t& cp : cps) cp = simple_lower(cp);
  return utf8::encode(cps);
}

std::u32string nfc(const std::u32string& text) {
  std::u32string decomposed;
  decomposed.reserve(text.size());
  for (char32_t cp : text) canonical_decompose(cp, decomposed);
  canonical_reorder(decomposed);

  std::u32string out;
  out.reserve(decomposed.size());
  std::size_t starter = std::u32string::npos;
  int prev_cc = -1;
  for (char32_t cp : decomposed) {
    const int cc = combining_class(cp);
    if (starter != std::u32string::npos && (out.size() == starter + 1 || prev_cc < cc)) {
      if (char32_t composed = compose_pair(out[starter], cp)) {
        out[starter] = composed;
        continue;
      }
    }
    out.push_back(cp);
    if (cc == 0) {
      starter = out.size() - 1;
      prev_cc = -1;
    } else {
      prev_cc = cc;
    }
  }
  return out;
}

std::string nfc(std::string_view text) { return utf8::encode(nfc(utf8::decode(text))); }

}  // namespace btk::unicode
