#pragma once

#include <cstddef>
#include <cstdint>

namespace btk::detail {

struct CpRange {
  char32_t lo;
  char32_t hi;
};

struct CpPair {
  char32_t from;
  char32_t to;
};

struct CpByte {
  char32_t cp;
  std::uint8_t value;
};

struct DecompEntry {
  char32_t cp;
  std::uint32_t offset;
  std::uint32_t length;
};

struct CompEntry {
  std::uint64_t key;  // (first << 32) | second
  char32_t composed;
};

extern const CpRange kWhitespaceRanges[];
extern const std::size_t kWhitespaceRanges_size;
extern const CpRange kPunctRanges[];
extern const std::size_t kPunctRanges_size;
extern const CpPair kLowerPairs[];
extern const std::size_t kLowerPairs_size;
extern const CpByte kCombiningClass[];
extern const std::size_t kCombiningClass_size;
extern const DecompEntry kDecompIndex[];
extern const std::size_t kDecompIndex_size;
extern const char32_t kDecompData[];
extern const std::size_t kDecompData_size;
extern const CompEntry kCompPairs[];
extern const std::size_t kCompPairs_size;

}  // namespace btk::detail
