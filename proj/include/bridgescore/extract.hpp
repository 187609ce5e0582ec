#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bridgescore/textmatch.hpp"
#include "bridgescore/vocabulary.hpp"

namespace bridgescore {

/// The five-attribute structured form of one damage description. All values
/// are canonical Vocabulary names; damage is multi-valued, primary first.
struct StructuredAttributes {
  std::optional<std::string> member;
  std::vector<std::string> damages;
  std::optional<std::string> location;
  std::optional<std::string> severity;  // high | medium | low
  std::optional<std::string> extent;

  std::optional<std::string> primary_damage() const {
    if (damages.empty()) return std::nullopt;
    return damages.front();
  }

  bool operator==(const StructuredAttributes&) const = default;
};

/// Clause spans governed by a negation marker. Clauses split on
/// sentence-final punctuation, semicolons, and newlines (not commas); a
/// marker negates its own clause only. Spans never overlap.
std::vector<TextSpan> detect_negation_spans(std::string_view text,
                                            const Vocabulary& vocab);

/// Two-pass dictionary extraction: collect every surface-form match, drop
/// matches inside negation spans, then resolve each attribute by earliest
/// occurrence (same start: longest surface wins). The location pass skips
/// the exact span already consumed by the member pass, so a lone "deck"
/// names the member, not the member and the location at once.
/// `warnings` (optional) collects non-fatal notes such as conflicting
/// severity mentions.
StructuredAttributes extract_attributes(std::string_view text,
                                        const Vocabulary& vocab,
                                        std::vector<std::string>* warnings = nullptr);

/// Deterministic text form of the attributes, built from canonical names:
/// "crack and spalling on girder, girder bottom face, severity high,
/// extent local". Re-extracting a rendering reproduces the attributes.
std::string canonical_rendering(const StructuredAttributes& a);

/// Compact JSON object with the five fields (damage as a list).
std::string attributes_json(const StructuredAttributes& a);

struct FrequencyTables {
  std::size_t total = 0;
  std::map<std::string, std::size_t> member_counts;
  std::map<std::string, std::size_t> damage_counts;
  std::map<std::pair<std::string, std::string>, std::size_t> cooccurrence;
};

/// Per-canonical mention counts over a set of extractions plus the
/// member x damage co-occurrence matrix (records containing both).
FrequencyTables attribute_frequencies(const std::vector<StructuredAttributes>& attrs);

/// Top-n rows of a count table, ordered by count descending then name.
std::vector<std::pair<std::string, std::size_t>> top_counts(
    const std::map<std::string, std::size_t>& table, std::size_t n);

}  // namespace bridgescore
