#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Small UTF-8 / character-class helpers shared by the corpus normalizer and
// the shape featurizer. Only what the pipeline needs; not a general Unicode
// library.

namespace relclass::text {

// Decodes the code point starting at s[pos] and advances pos past it.
// Invalid bytes decode as themselves (latin-1 fallback) so malformed input
// never stalls the scanner.
inline char32_t next_codepoint(std::string_view s, std::size_t& pos) {
  unsigned char b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return b0;
  }
  if (pos + len > s.size()) {
    ++pos;
    return b0;
  }
  for (int i = 1; i < len; ++i) {
    unsigned char bi = static_cast<unsigned char>(s[pos + i]);
    if ((bi & 0xC0) != 0x80) {
      ++pos;
      return b0;
    }
    cp = (cp << 6) | (bi & 0x3F);
  }
  pos += len;
  return cp;
}

// Unicode punctuation, restricted to the ranges that occur in scientific
// English text: ASCII punctuation plus the General Punctuation block and a
// few Latin-1 marks.
inline bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00AB:  // left guillemet
    case 0x00B7:  // middle dot
    case 0x00BB:  // right guillemet
    case 0x00BF:  // inverted question mark
      return true;
    default:
      break;
  }
  // General Punctuation: dashes, quotes, ellipsis, daggers, permille.
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  return false;
}

// True iff the token is non-empty and every code point is punctuation.
inline bool is_punct_only(std::string_view token) {
  if (token.empty()) return false;
  std::size_t pos = 0;
  while (pos < token.size()) {
    if (!is_punct_cp(next_codepoint(token, pos))) return false;
  }
  return true;
}

inline bool is_ascii_upper(char32_t cp) { return cp >= 'A' && cp <= 'Z'; }
inline bool is_ascii_lower(char32_t cp) { return cp >= 'a' && cp <= 'z'; }

// Quote characters counted by the shape feature: ' " ` and the curly
// single/double quotes.
inline bool is_quote_cp(char32_t cp) {
  switch (cp) {
    case '\'':
    case '"':
    case '`':
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
      return true;
    default:
      return false;
  }
}

}  // namespace relclass::text
