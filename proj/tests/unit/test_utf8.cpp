#include <catch2/catch_amalgamated.hpp>

#include "ocrsynth/utf8.hpp"

using namespace ocrsynth;

TEST_CASE("utf8 round trip across encoding widths", "[utf8]") {
  const std::u32string cps = {0x24,    0x7F,    0x80,    0x7FF,   0x800,
                              0x1234,  0xFFFD,  0xFFFF,  0x10000, 0x1F600,
                              0x10FFFF};
  for (char32_t c : cps) {
    const std::string bytes = encode_utf8(c);
    size_t i = 0;
    CHECK(decode_utf8_at(bytes, i) == c);
    CHECK(i == bytes.size());
  }
  const std::u32string text = U"příliš žluťoučký kůň 🐎 ॥ 漢字";
  CHECK(decode_utf8(encode_utf8(text)) == text);
}

TEST_CASE("utf8 rejects malformed sequences one byte at a time", "[utf8]") {
  const auto decode_all = [](std::string_view s) {
    std::u32string out;
    size_t i = 0;
    while (i < s.size()) out.push_back(decode_utf8_at(s, i));
    return out;
  };

  SECTION("overlong encoding") {
    const std::string overlong = "\xC0\xAF";  // '/' encoded in two bytes
    const std::u32string got = decode_all(overlong);
    REQUIRE(got.size() == 2);
    CHECK(got[0] == 0xFFFD);
    CHECK(got[1] == 0xFFFD);
  }
  SECTION("surrogate half") {
    const std::u32string got = decode_all("\xED\xA0\x80");
    CHECK(got.front() == 0xFFFD);
  }
  SECTION("beyond U+10FFFF") {
    const std::u32string got = decode_all("\xF4\x90\x80\x80");
    CHECK(got.front() == 0xFFFD);
  }
  SECTION("truncated tail") {
    const std::u32string got = decode_all("\xE2\x82");
    CHECK(got == std::u32string{0xFFFD, 0xFFFD});
  }
  SECTION("bare continuation byte") {
    const std::u32string got = decode_all("\x80x");
    REQUIRE(got.size() == 2);
    CHECK(got[0] == 0xFFFD);
    CHECK(got[1] == U'x');
  }
}

TEST_CASE("char_count counts scalars not bytes", "[utf8]") {
  CHECK(char_count("") == 0);
  CHECK(char_count("abc") == 3);
  CHECK(char_count("žluť") == 4);
  CHECK(char_count("🐎") == 1);
}

TEST_CASE("is_space follows Unicode White_Space", "[utf8]") {
  for (char32_t c : {U' ', U'\t', U'\n', U'\r', char32_t{0xA0}, char32_t{0x2003},
                     char32_t{0x3000}, char32_t{0x2028}})
    CHECK(is_space(c));
  for (char32_t c : {U'a', U'.', char32_t{0x200B}, char32_t{0x4E00}})
    CHECK_FALSE(is_space(c));
}
