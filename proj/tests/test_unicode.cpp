#include <doctest.h>

#include "btk/unicode.hpp"
#include "btk/util.hpp"

using namespace btk;

TEST_CASE("utf8 round trip") {
  const std::string text = "xin chào thế giới é ệ 日本語";
  CHECK(utf8::encode(utf8::decode(text)) == text);
}

TEST_CASE("utf8 invalid bytes decode to replacement characters") {
  const std::string bad = "a\xC3("  // truncated two-byte sequence
                          "\xFF";
  const std::u32string cps = utf8::decode(bad);
  CHECK(cps.size() == 4);
  CHECK(cps[0] == U'a');
  CHECK(cps[1] == 0xFFFD);
  CHECK(cps[2] == U'(');
  CHECK(cps[3] == 0xFFFD);
}

TEST_CASE("whitespace and punctuation classes") {
  CHECK(unicode::is_space(U' '));
  CHECK(unicode::is_space(U'\t'));
  CHECK(unicode::is_space(0x00A0));
  CHECK(unicode::is_space(0x3000));
  CHECK_FALSE(unicode::is_space(U'a'));

  CHECK(unicode::is_punct(U','));
  CHECK(unicode::is_punct(U'!'));
  CHECK(unicode::is_punct(0x2019));  // right single quote
  CHECK(unicode::is_punct(0x3002));  // ideographic full stop
  CHECK_FALSE(unicode::is_punct(U'5'));
  CHECK_FALSE(unicode::is_punct(U'$'));  // currency symbol, not punctuation
  CHECK_FALSE(unicode::is_punct(U'a'));
}

TEST_CASE("simple lowercase covers Vietnamese letters") {
  CHECK(unicode::lower("The CAT") == "the cat");
  CHECK(unicode::lower("XIN CHÀO") == "xin chào");
  CHECK(unicode::lower("VIỆT NAM ƠƯĐ") == "việt nam ơưđ");
}

TEST_CASE("nfc composes decomposed sequences") {
  // e + combining acute vs precomposed é
  CHECK(unicode::nfc(std::string("e\xCC\x81")) == "\xC3\xA9");
  // identical visible string through either encoding
  CHECK(unicode::nfc(std::string("caf\x65\xCC\x81")) == unicode::nfc(std::string("café")));
}

TEST_CASE("nfc reorders combining marks canonically") {
  // ệ as e + circumflex(ccc 230) + dot-below(ccc 220), both mark orders
  const std::string a = "e\xCC\x82\xCC\xA3";
  const std::string b = "e\xCC\xA3\xCC\x82";
  const std::string precomposed = "\xE1\xBB\x87";  // U+1EC7
  CHECK(unicode::nfc(a) == precomposed);
  CHECK(unicode::nfc(b) == precomposed);
}

TEST_CASE("nfc is idempotent on mixed text") {
  const std::string samples[] = {"ệ ơ ưa", "e\xCC\x81\xCC\xA3 plain", "다 한국어",
                                 "no marks at all", ""};
  for (const std::string& s : samples) {
    const std::string once = unicode::nfc(s);
    CHECK(unicode::nfc(once) == once);
  }
}

TEST_CASE("trim removes unicode whitespace") {
  CHECK(trim("  a b\t") == "a b");
  CHECK(trim("\xC2\xA0hi\xC2\xA0") == "hi");  // NBSP
  CHECK(trim("   ") == "");
  CHECK(is_blank(" \t\r"));
  CHECK_FALSE(is_blank(" x "));
}

TEST_CASE("murmur3 is stable and spreads") {
  const Hash128 a = murmur3_128("hello");
  const Hash128 b = murmur3_128("hello");
  const Hash128 c = murmur3_128("hellp");
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK((a.lo != 0 || a.hi != 0));
}
