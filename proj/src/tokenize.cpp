#include "bridgescore/tokenize.hpp"

namespace bridgescore {

char32_t utf8_next(std::string_view text, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(text[i]);
  if (b0 < 0x80) {
    ++i;
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
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(len) > text.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size();) {
    utf8_next(text, i);
    ++n;
  }
  return n;
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x3040 && cp <= 0x30FF)     // hiragana, katakana
         || (cp >= 0x3400 && cp <= 0x4DBF)  // CJK ext A
         || (cp >= 0x4E00 && cp <= 0x9FFF)  // CJK unified
         || (cp >= 0xF900 && cp <= 0xFAFF)  // CJK compat
         || (cp >= 0xFF66 && cp <= 0xFF9D); // halfwidth katakana
}

namespace {

bool is_word_cp(char32_t cp) {
  if (cp < 0x80)
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= 'a' && cp <= 'z');
  if (is_cjk(cp)) return false;
  // Latin-1 and beyond: treat letters of spaced scripts as word characters.
  // Punctuation blocks and symbols separate.
  if (cp >= 0xA0 && cp <= 0xBF) return false;   // Latin-1 punctuation/symbols
  if (cp >= 0x2000 && cp <= 0x303F) return false;  // general + CJK punctuation
  if (cp >= 0xFF00 && cp <= 0xFF65) return false;  // fullwidth forms, punct
  if (cp == 0xFFFD) return false;
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& cfg) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    char32_t cp = utf8_next(text, i);
    if (cfg.per_char_cjk && is_cjk(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
      tokens.emplace_back(text.substr(start, i - start));
    } else if (is_word_cp(cp)) {
      current.append(text.substr(start, i - start));
    } else {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t count_tokens(std::string_view text, const TokenizerConfig& cfg) {
  std::size_t n = 0;
  bool in_word = false;
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = utf8_next(text, i);
    if (cfg.per_char_cjk && is_cjk(cp)) {
      if (in_word) {
        ++n;
        in_word = false;
      }
      ++n;
    } else if (is_word_cp(cp)) {
      in_word = true;
    } else if (in_word) {
      ++n;
      in_word = false;
    }
  }
  if (in_word) ++n;
  return n;
}

}  // namespace bridgescore
