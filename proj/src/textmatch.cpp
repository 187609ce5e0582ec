#include "bridgescore/textmatch.hpp"

#include <algorithm>
#include <cctype>

namespace bridgescore {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

namespace {

bool is_ascii_word(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return (u < 0x80) && (std::isalnum(u) != 0);
}

}  // namespace

std::vector<TextSpan> find_term(std::string_view text, std::string_view term) {
  std::vector<TextSpan> spans;
  if (term.empty() || text.size() < term.size()) return spans;

  const std::string haystack = ascii_lower(text);
  const std::string needle = ascii_lower(term);
  const bool bound_left = is_ascii_word(needle.front());
  const bool bound_right = is_ascii_word(needle.back());

  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    std::size_t end = pos + needle.size();
    bool ok = true;
    if (bound_left && pos > 0 && is_ascii_word(haystack[pos - 1])) ok = false;
    if (bound_right && end < haystack.size() && is_ascii_word(haystack[end]))
      ok = false;
    if (ok) spans.push_back({pos, end});
    ++pos;
  }
  return spans;
}

bool contains_term(std::string_view text, std::string_view term) {
  return !find_term(text, term).empty();
}

bool contains_any_term(std::string_view text, const std::vector<std::string>& terms) {
  for (const auto& term : terms)
    if (contains_term(text, term)) return true;
  return false;
}

TextSpan find_first_of_terms(std::string_view text,
                             const std::vector<std::string>& terms) {
  TextSpan best{std::string_view::npos, std::string_view::npos};
  for (const auto& term : terms) {
    auto spans = find_term(text, term);
    if (!spans.empty() && spans.front().begin < best.begin) best = spans.front();
  }
  return best;
}

}  // namespace bridgescore
