#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bridgescore {

/// Deterministic, dependency-free tokenizer used wherever a token count is
/// needed and the source model's tokenizer is unavailable. Spaced scripts are
/// segmented into word runs (letters/digits, Unicode-aware); CJK ideographs
/// and kana count one token per character. Everything else separates tokens.
struct TokenizerConfig {
  bool per_char_cjk = true;

  bool operator==(const TokenizerConfig&) const = default;
};

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& cfg = {});

std::size_t count_tokens(std::string_view text, const TokenizerConfig& cfg = {});

/// Number of Unicode codepoints (the "characters" of length filters).
std::size_t utf8_length(std::string_view text);

/// Decodes the codepoint starting at byte `i`; advances `i` past it.
/// Invalid sequences decode as one byte (U+FFFD substitute semantics).
char32_t utf8_next(std::string_view text, std::size_t& i);

bool is_cjk(char32_t cp);

}  // namespace bridgescore
