// Copyright 2026 The chaptereval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text normalization and tokenization applied before any similarity score.
//
// Normalization: Unicode NFC, lowercase (root locale), whitespace runs
// collapsed to one ASCII space, leading/trailing whitespace removed.
// Tokenization: split on whitespace; Han/Hiragana/Katakana code points become
// one token each; leading and trailing punctuation is stripped from every
// token and tokens left empty are dropped.

#ifndef CHAPTEREVAL_TEXT_HPP_
#define CHAPTEREVAL_TEXT_HPP_

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chaptereval/errors.hpp"

namespace chaptereval {

namespace text_internal {

inline bool IsSegmentedPerCodePoint(UChar32 c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA ||
         script == USCRIPT_KATAKANA;
}

inline bool IsPunct(UChar32 c) {
  return u_ispunct(c) || u_charType(c) == U_MATH_SYMBOL ||
         u_charType(c) == U_OTHER_SYMBOL || u_charType(c) == U_CURRENCY_SYMBOL ||
         u_charType(c) == U_MODIFIER_SYMBOL;
}

// Decodes UTF-8, replacing malformed sequences with U+FFFD.
inline std::vector<UChar32> Decode(std::string_view s) {
  std::vector<UChar32> out;
  out.reserve(s.size());
  int32_t i = 0;
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

inline void AppendUtf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(n));
}

inline void FlushToken(std::vector<UChar32>& piece,
                       std::vector<std::string>& tokens) {
  std::size_t b = 0;
  std::size_t e = piece.size();
  while (b < e && IsPunct(piece[b])) ++b;
  while (e > b && IsPunct(piece[e - 1])) --e;
  if (b < e) {
    std::string token;
    for (std::size_t k = b; k < e; ++k) AppendUtf8(token, piece[k]);
    tokens.push_back(std::move(token));
  }
  piece.clear();
}

}  // namespace text_internal

inline std::string NormalizeText(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString composed = nfc->normalize(u, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  composed.toLower(icu::Locale::getRoot());
  std::string lowered;
  composed.toUTF8String(lowered);

  std::string out;
  out.reserve(lowered.size());
  bool pending_space = false;
  for (UChar32 c : text_internal::Decode(lowered)) {
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    text_internal::AppendUtf8(out, c);
  }
  return out;
}

// Tokenizes already-normalized text.
inline std::vector<std::string> Tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::vector<UChar32> piece;
  for (UChar32 c : text_internal::Decode(normalized)) {
    if (u_isUWhiteSpace(c)) {
      text_internal::FlushToken(piece, tokens);
    } else if (text_internal::IsSegmentedPerCodePoint(c)) {
      text_internal::FlushToken(piece, tokens);
      piece.push_back(c);
      text_internal::FlushToken(piece, tokens);
    } else {
      piece.push_back(c);
    }
  }
  text_internal::FlushToken(piece, tokens);
  return tokens;
}

// Whitespace-only split of raw text, preserving case and punctuation. Used
// where text must be cut and re-joined without loss.
inline std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::string JoinWords(const std::vector<std::string>& words,
                             std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) {
    if (k > begin) out.push_back(' ');
    out += words[k];
  }
  return out;
}

}  // namespace chaptereval

#endif  // CHAPTEREVAL_TEXT_HPP_
