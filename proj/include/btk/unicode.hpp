#pragma once

#include <string>
#include <string_view>

namespace btk::unicode {

bool is_space(char32_t cp);

// True for codepoints of Unicode general category P*.
bool is_punct(char32_t cp);

// Simple (single-codepoint) lowercase mapping; identity when no mapping.
char32_t simple_lower(char32_t cp);

std::string lower(std::string_view text);

// Canonical composition (NFC): full canonical decomposition, canonical
// reordering, then recomposition. Hangul is handled algorithmically.
std::u32string nfc(const std::u32string& text);
std::string nfc(std::string_view text);

}  // namespace btk::unicode
