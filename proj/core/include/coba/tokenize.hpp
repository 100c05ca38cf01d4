#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace coba {

/// A canonical word with its location in the source text. Byte offsets index
/// the UTF-8 string; char offsets count Unicode code points.
struct TokenSpan {
  std::string text;
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
};

/// Lowercased word tokens. Splits on whitespace and punctuation; a hyphen or
/// apostrophe is kept when it sits between two word characters
/// ("in-n-out", "don't"). Non-ASCII letters are word characters and are
/// passed through unchanged apart from Latin-1 case folding.
std::vector<std::string> tokenize(std::string_view text);
std::vector<TokenSpan> tokenize_spans(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

/// ASCII/Latin-1 lowercasing of a single word.
std::string to_lower(std::string_view text);

/// Number of Unicode code points in a UTF-8 string.
std::size_t char_length(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

}  // namespace coba
