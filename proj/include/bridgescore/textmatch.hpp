#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bridgescore {

struct TextSpan {
  std::size_t begin = 0;  // byte offsets, [begin, end)
  std::size_t end = 0;

  bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
  bool overlaps(const TextSpan& o) const {
    return begin < o.end && o.begin < end;
  }
  bool operator==(const TextSpan&) const = default;
};

/// All occurrences of `term` in `text`. Matching is ASCII-case-insensitive.
/// When the term starts or ends with an ASCII word character the match must
/// sit on a word boundary there, so "stain" does not fire inside "sustained".
/// Terms with no ASCII word edge (e.g. Japanese) match as plain substrings.
std::vector<TextSpan> find_term(std::string_view text, std::string_view term);

bool contains_term(std::string_view text, std::string_view term);

bool contains_any_term(std::string_view text, const std::vector<std::string>& terms);

/// First occurrence among any of `terms`; {npos, npos} when absent.
TextSpan find_first_of_terms(std::string_view text,
                             const std::vector<std::string>& terms);

std::string ascii_lower(std::string_view s);

}  // namespace bridgescore
