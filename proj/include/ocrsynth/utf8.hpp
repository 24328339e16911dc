#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ocrsynth {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes one scalar starting at s[i]. Advances i by the bytes consumed.
// Invalid input consumes a single byte and yields U+FFFD.
inline char32_t decode_utf8_at(std::string_view s, size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto at = [&](size_t k) { return static_cast<uint32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
  if ((b0 & 0xE0) == 0xC0) {
    if (!cont(1)) { ++i; return kReplacementChar; }
    uint32_t cp = (static_cast<uint32_t>(b0 & 0x1F) << 6) | at(1);
    if (cp < 0x80) { ++i; return kReplacementChar; }
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0) {
    if (!cont(1) || !cont(2)) { ++i; return kReplacementChar; }
    uint32_t cp = (static_cast<uint32_t>(b0 & 0x0F) << 12) | (at(1) << 6) | at(2);
    if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) { ++i; return kReplacementChar; }
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0) {
    if (!cont(1) || !cont(2) || !cont(3)) { ++i; return kReplacementChar; }
    uint32_t cp = (static_cast<uint32_t>(b0 & 0x07) << 18) | (at(1) << 12) | (at(2) << 6) | at(3);
    if (cp < 0x10000 || cp > 0x10FFFF) { ++i; return kReplacementChar; }
    i += 4;
    return cp;
  }
  ++i;
  return kReplacementChar;
}

inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) out.push_back(decode_utf8_at(s, i));
  return out;
}

inline void encode_utf8(char32_t cp, std::string& out) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacementChar;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) encode_utf8(cp, out);
  return out;
}

inline std::string encode_utf8(char32_t cp) {
  std::string out;
  encode_utf8(cp, out);
  return out;
}

// Number of Unicode scalars in a UTF-8 string.
inline size_t char_count(std::string_view s) {
  size_t i = 0, n = 0;
  while (i < s.size()) {
    decode_utf8_at(s, i);
    ++n;
  }
  return n;
}

// Unicode whitespace (White_Space property).
inline bool is_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

}  // namespace ocrsynth
