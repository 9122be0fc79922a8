#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace btk {

// Base class for all toolkit errors so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace utf8 {

// Decodes UTF-8 into codepoints. Invalid bytes decode to U+FFFD, one
// replacement per bad byte; never throws.
std::u32string decode(std::string_view text);

std::string encode(const std::u32string& codepoints);
void append(std::string& out, char32_t cp);

}  // namespace utf8

// Trims Unicode whitespace from both ends.
std::string trim(std::string_view text);
bool is_blank(std::string_view text);

struct Hash128 {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  friend bool operator==(const Hash128&, const Hash128&) = default;
};

struct Hash128Hasher {
  std::size_t operator()(const Hash128& h) const noexcept {
    return static_cast<std::size_t>(h.lo ^ (h.hi * 0x9E3779B97F4A7C15ULL));
  }
};

// MurmurHash3 x64 128-bit, fixed seed. Not cryptographic.
Hash128 murmur3_128(std::string_view data, std::uint64_t seed = 0x42F0E1EBA9EA3693ULL);

// Uniform integer in [0, bound) by rejection sampling; deterministic for a
// given engine state on every platform, unlike std::uniform_int_distribution.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound);

template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_rand(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// Runs fn(0..n-1) on up to `workers` threads. Results must be written to
// pre-sized slots keyed by index; the first exception (lowest index) is
// rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::vector<std::string> split(std::string_view text, char sep);

}  // namespace btk
