#include "coba/tokenize.hpp"

#include <cstdint>

namespace coba {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
  bool valid;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = b0 < 0xF0 ? 3 : 1;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if (b0 >= 0x80) {
      len = 1;
    }
    bool valid = b0 < 0x80 || len > 1;
    if (len > 1) {
      if (i + len > text.size()) {
        valid = false;
      } else {
        for (std::size_t k = 1; k < len; ++k) {
          const auto b = static_cast<unsigned char>(text[i + k]);
          if ((b & 0xC0) != 0x80) {
            valid = false;
            break;
          }
          cp = (cp << 6) | (b & 0x3F);
        }
      }
      if (!valid) len = 1;
    }
    out.push_back({valid ? cp : U'�', i, len, valid});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  if (c == ' ' || (c >= 0x09 && c <= 0x0D)) return true;
  switch (c) {
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0x200B: case 0xFEFF:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E) || c < 0x20 ||
           c == 0x7F;
  }
  if (c >= 0xA1 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
  if (c == 0xD7 || c == 0xF7) return true;
  if (c >= 0x2010 && c <= 0x2027) return true;
  if (c >= 0x2030 && c <= 0x205E) return true;
  if (c >= 0x20A0 && c <= 0x20CF) return true;  // currency
  if (c >= 0x3001 && c <= 0x303F) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  return false;
}

bool is_joiner(char32_t c) { return c == '-' || c == '\'' || c == 0x2019; }

bool is_word(const CodePoint& cp) {
  if (!cp.valid) return true;
  return !is_space(cp.value) && !is_punct(cp.value);
}

char32_t fold(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  return c;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

void append_folded(std::string& out, std::string_view text,
                   const CodePoint& cp) {
  if (!cp.valid) {
    out.append(text.substr(cp.offset, cp.length));
  } else if (cp.value == 0x2019) {
    out.push_back('\'');
  } else {
    append_utf8(out, fold(cp.value));
  }
}

}  // namespace

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  const auto cps = decode(text);
  std::vector<TokenSpan> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_word(cps[i])) {
      ++i;
      continue;
    }
    TokenSpan tok;
    tok.byte_begin = cps[i].offset;
    tok.char_begin = i;
    while (i < cps.size()) {
      if (is_word(cps[i])) {
        append_folded(tok.text, text, cps[i]);
        ++i;
      } else if (cps[i].valid && is_joiner(cps[i].value) &&
                 i + 1 < cps.size() && is_word(cps[i + 1])) {
        append_folded(tok.text, text, cps[i]);
        ++i;
      } else {
        break;
      }
    }
    tok.byte_end = cps[i - 1].offset + cps[i - 1].length;
    tok.char_end = i;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.text));
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const auto& cp : decode(text)) append_folded(out, text, cp);
  return out;
}

std::size_t char_length(std::string_view text) { return decode(text).size(); }

std::string_view trim(std::string_view text) noexcept {
  const auto ws = " \t\r\n\f\v";
  const auto b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

}  // namespace coba
