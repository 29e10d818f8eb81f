#pragma once

// Social-media comment normalization.
//
// Rules run in a fixed order over decoded codepoints:
//   1. URLs (http://, https://, www.) become the token "<url>"
//   2. '#'-prefixed tokens are dropped whole
//   3. emoji codepoints are removed (they act as token breaks)
//   4. letters are lowercased
//   5. whitespace runs collapse to one space; ends are trimmed
// ASCII punctuation is kept. Invalid UTF-8 bytes are dropped on decode.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace relatedness {

namespace utf8 {

/// Decodes UTF-8, silently skipping any byte that does not start a valid
/// (shortest-form, non-surrogate, <= U+10FFFF) sequence.
inline std::u32string decode_lossy(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char b0 = s[i];
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      ++i;
      continue;
    }
    bool ok = i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
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

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

}  // namespace utf8

/// Codepoints carrying the Unicode Emoji property that are not ordinary
/// text (digits, '#', '*' are excluded), plus the joiners, variation
/// selectors, keycap and tag characters used to build emoji sequences.
constexpr bool is_emoji(char32_t cp) noexcept {
  struct Range { char32_t lo, hi; };
  constexpr std::array<Range, 40> ranges{{
      {0x00A9, 0x00A9}, {0x00AE, 0x00AE}, {0x200D, 0x200D}, {0x203C, 0x203C},
      {0x2049, 0x2049}, {0x20E3, 0x20E3}, {0x2122, 0x2122}, {0x2139, 0x2139},
      {0x2194, 0x2199}, {0x21A9, 0x21AA}, {0x231A, 0x231B}, {0x2328, 0x2328},
      {0x23CF, 0x23CF}, {0x23E9, 0x23F3}, {0x23F8, 0x23FA}, {0x24C2, 0x24C2},
      {0x25AA, 0x25AB}, {0x25B6, 0x25B6}, {0x25C0, 0x25C0}, {0x25FB, 0x25FE},
      {0x2600, 0x27BF}, {0x2934, 0x2935}, {0x2B05, 0x2B07}, {0x2B1B, 0x2B1C},
      {0x2B50, 0x2B50}, {0x2B55, 0x2B55}, {0x3030, 0x3030}, {0x303D, 0x303D},
      {0x3297, 0x3297}, {0x3299, 0x3299}, {0xFE0E, 0xFE0F}, {0x1F000, 0x1FAFF},
      {0xE0020, 0xE007F}, {0x2640, 0x2642}, {0x2695, 0x2696}, {0x26A7, 0x26A7},
      {0x2702, 0x2702}, {0x2705, 0x2705}, {0x2728, 0x2728}, {0x2764, 0x2764},
  }};
  for (const auto& r : ranges)
    if (cp >= r.lo && cp <= r.hi) return true;
  return false;
}

constexpr bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

constexpr bool is_ascii_punct(char32_t cp) noexcept {
  return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
         (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

constexpr bool is_ascii_alnum(char32_t cp) noexcept {
  return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

/// Simple case mapping for ASCII, Latin-1, Latin Extended-A, Greek and
/// Cyrillic capitals. Everything else passes through.
constexpr char32_t to_lower(char32_t cp) noexcept {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp == 0x130) return U'i';
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177))
    return (cp % 2 == 0) ? cp + 1 : cp;
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E))
    return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

namespace detail {

constexpr bool is_break(char32_t cp) noexcept { return is_space(cp) || is_emoji(cp); }

inline bool starts_with_ci(std::u32string_view text, std::size_t at, std::u32string_view prefix) {
  if (text.size() - at < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char32_t c = text[at + k];
    if (c >= U'A' && c <= U'Z') c += 0x20;
    if (c != prefix[k]) return false;
  }
  return true;
}

/// Length of the URL prefix starting at `at`, or 0. A prefix counts only
/// at a word start and when followed by a non-punctuation character.
inline std::size_t url_prefix_at(std::u32string_view text, std::size_t at) {
  if (at > 0 && is_ascii_alnum(text[at - 1])) return 0;
  for (std::u32string_view prefix : {std::u32string_view(U"https://"), std::u32string_view(U"http://"),
                                     std::u32string_view(U"www.")}) {
    if (!starts_with_ci(text, at, prefix)) continue;
    const std::size_t next = at + prefix.size();
    if (next < text.size() && !is_break(text[next]) && !is_ascii_punct(text[next])) return prefix.size();
  }
  return 0;
}

inline std::u32string replace_urls(std::u32string_view text) {
  static constexpr std::u32string_view token = U"<url>";
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t prefix = url_prefix_at(text, i);
    if (prefix == 0) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t end = i + prefix;
    while (end < text.size() && !is_break(text[end])) ++end;
    while (end > i + prefix + 1 && is_ascii_punct(text[end - 1]) && text[end - 1] != U'/') --end;
    out.append(token);
    i = end;
  }
  return out;
}

inline std::u32string drop_hashtags(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool token_start = i == 0 || is_break(text[i - 1]);
    if (token_start && text[i] == U'#') {
      while (i < text.size() && !is_break(text[i])) ++i;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

}  // namespace detail

/// Normalizes one raw comment. Pure; safe to call concurrently.
inline std::string clean_text(std::string_view raw) {
  std::u32string text = detail::drop_hashtags(detail::replace_urls(utf8::decode_lossy(raw)));

  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t cp : text) {
    if (is_emoji(cp) || is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(out, to_lower(cp));
  }
  return out;
}

}  // namespace relatedness
