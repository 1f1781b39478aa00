#pragma once

// Minimal UTF-8 helpers. Everything operates on code points; no
// normalization forms and no locale dependence.

#include <string>
#include <string_view>

namespace polite::utf8 {

/// Decodes UTF-8. Invalid bytes decode to U+FFFD, one per byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

/// Number of code points in `text`.
std::size_t length(std::string_view text);

/// Lowercases ASCII and Latin-1/Latin Extended-A letters; other scripts
/// pass through unchanged.
char32_t fold(char32_t cp);
std::u32string fold(std::u32string_view text);
std::string fold(std::string_view text);

bool is_space(char32_t cp);
bool is_han(char32_t cp);
bool is_ascii_digit(char32_t cp);
bool is_ascii_alpha(char32_t cp);
/// Letters we treat as part of Latin words (ASCII + Latin-1 + Extended-A/B).
bool is_latin_letter(char32_t cp);
/// Pictographic emoji and symbol blocks.
bool is_emoji(char32_t cp);
/// Joiners and modifiers that attach to a preceding emoji.
bool is_emoji_modifier(char32_t cp);
/// ASCII punctuation/symbols, general punctuation, CJK and full-width
/// punctuation.
bool is_punct(char32_t cp);

std::string_view trim(std::string_view text);

}  // namespace polite::utf8
