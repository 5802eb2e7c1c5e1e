// Copyright 2026 The bailaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BAILAUDIT_TEXT_HPP_
#define BAILAUDIT_TEXT_HPP_

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bailaudit {

// Codepoint-level helpers for UTF-8 text. Decoding is lenient: malformed
// byte sequences decode to U+FFFD so that a single bad record cannot take
// down a batch run.

inline void utf8_append(std::string& out, char32_t cp) {
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
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

inline std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = 0xFFFD;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (len > 1) {
      if (i + len > s.size()) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
      bool ok = true;
      for (std::size_t k = 1; k < len; ++k) {
        const auto bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (bk & 0x3F);
      }
      if (!ok || cp > 0x10FFFF) {
        out.push_back(0xFFFD);
        ++i;
        continue;
      }
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size() * 3);
  for (char32_t cp : cps) utf8_append(out, cp);
  return out;
}

/// Canonical composition (NFC) of a UTF-8 string. Devanagari has several
/// byte-level spellings of the same glyph sequence (precomposed nukta
/// letters vs base+nukta); all downstream word equality assumes this
/// canonical form.
inline std::string nfc(std::string_view s) {
  if (s.empty()) return {};
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  if (U_FAILURE(ec)) throw std::runtime_error("ICU NFC instance unavailable");

  // UTF-8 -> UTF-16, substituting U+FFFD for malformed input.
  std::vector<UChar> u16(s.size() + 1);
  int32_t len16 = 0;
  ec = U_ZERO_ERROR;
  u_strFromUTF8WithSub(u16.data(), static_cast<int32_t>(u16.size()), &len16,
                       s.data(), static_cast<int32_t>(s.size()), 0xFFFD,
                       nullptr, &ec);
  if (U_FAILURE(ec)) throw std::runtime_error("UTF-8 decode failed");

  std::vector<UChar> out16(static_cast<std::size_t>(len16) + 16);
  ec = U_ZERO_ERROR;
  int32_t outlen = unorm2_normalize(norm, u16.data(), len16, out16.data(),
                                    static_cast<int32_t>(out16.size()), &ec);
  if (ec == U_BUFFER_OVERFLOW_ERROR) {
    out16.resize(static_cast<std::size_t>(outlen) + 1);
    ec = U_ZERO_ERROR;
    outlen = unorm2_normalize(norm, u16.data(), len16, out16.data(),
                              static_cast<int32_t>(out16.size()), &ec);
  }
  if (U_FAILURE(ec)) throw std::runtime_error("NFC normalization failed");

  std::string out(static_cast<std::size_t>(outlen) * 3 + 16, '\0');
  int32_t len8 = 0;
  ec = U_ZERO_ERROR;
  u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &len8,
              out16.data(), outlen, &ec);
  if (ec == U_BUFFER_OVERFLOW_ERROR) {
    out.resize(static_cast<std::size_t>(len8));
    ec = U_ZERO_ERROR;
    u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &len8,
                out16.data(), outlen, &ec);
  }
  if (U_FAILURE(ec)) throw std::runtime_error("UTF-8 encode failed");
  out.resize(static_cast<std::size_t>(len8));
  return out;
}

/// True for every Unicode general-category P* codepoint.
inline bool is_punctuation(char32_t cp) {
  return u_ispunct(static_cast<UChar32>(cp)) != 0;
}

/// Format controls (ZWJ, ZWNJ, BOM, directional marks). These are invisible
/// and break token equality, so the tokenizer drops them.
inline bool is_format_control(char32_t cp) {
  return u_charType(static_cast<UChar32>(cp)) == U_FORMAT_CHAR;
}

inline constexpr char32_t kDanda = 0x0964;
inline constexpr char32_t kDoubleDanda = 0x0965;

/// Word boundary for tokenization: Unicode whitespace plus the Devanagari
/// danda and double danda sentence marks.
inline bool is_word_delimiter(char32_t cp) {
  if (cp == kDanda || cp == kDoubleDanda) return true;
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

}  // namespace bailaudit

#endif  // BAILAUDIT_TEXT_HPP_
