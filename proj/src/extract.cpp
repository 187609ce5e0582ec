#include "bridgescore/extract.hpp"

#include <algorithm>
#include <cstdlib>

#include "bridgescore/tokenize.hpp"
#include "json.hpp"

namespace bridgescore {
namespace {

bool ascii_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Clause boundaries: sentence-final punctuation, semicolons, newlines.
/// Commas do not end a clause. A '.' flanked by digits is a decimal point.
std::vector<TextSpan> clause_spans(std::string_view text) {
  std::vector<TextSpan> spans;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t cp_start = i;
    const char32_t cp = utf8_next(text, i);
    bool is_delim = cp == U';' || cp == U'!' || cp == U'?' || cp == U'\n' ||
                    cp == U'。' || cp == U'．' || cp == U'；' ||
                    cp == U'！' || cp == U'？';
    if (cp == U'.') {
      const bool digit_before =
          cp_start > 0 && text[cp_start - 1] >= '0' && text[cp_start - 1] <= '9';
      const bool digit_after = i < text.size() && text[i] >= '0' && text[i] <= '9';
      is_delim = !(digit_before && digit_after);
    }
    if (is_delim) {
      if (cp_start > start) spans.push_back({start, cp_start});
      start = i;
    }
  }
  if (text.size() > start) spans.push_back({start, text.size()});
  return spans;
}

struct Cand {
  TextSpan span;
  const std::string* canonical;
};

void collect_surface_matches(std::string_view text, const std::vector<SurfaceEntry>& entries,
                             std::vector<Cand>& out) {
  for (const auto& entry : entries) {
    std::vector<std::string> surfaces = entry.surfaces;
    surfaces.push_back(entry.canonical);
    std::vector<std::string> seen;
    for (const auto& s : surfaces) {
      const std::string key = ascii_lower(s);
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      for (const auto& span : find_term(text, s)) out.push_back({span, &entry.canonical});
    }
  }
}

void drop_negated(std::vector<Cand>& cands, const std::vector<TextSpan>& negated) {
  std::erase_if(cands, [&](const Cand& c) {
    for (const auto& n : negated)
      if (c.span.overlaps(n)) return true;
    return false;
  });
}

/// Earliest occurrence wins; at the same start the longest surface wins.
const Cand* pick_best(const std::vector<Cand>& cands) {
  const Cand* best = nullptr;
  for (const auto& c : cands) {
    if (!best || c.span.begin < best->span.begin ||
        (c.span.begin == best->span.begin && c.span.end > best->span.end))
      best = &c;
  }
  return best;
}

/// Numeric extent mentions: "<number>%" or "<number> m2"-family units.
void collect_numeric_extents(std::string_view text, const NumericBands& bands,
                             std::vector<Cand>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (!(c >= '0' && c <= '9') ||
        (i > 0 && ascii_word_byte(static_cast<unsigned char>(text[i - 1])))) {
      ++i;
      continue;
    }
    const std::size_t num_start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (i + 1 < text.size() && text[i] == '.' && text[i + 1] >= '0' && text[i + 1] <= '9') {
      ++i;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    }
    const double value = std::strtod(std::string(text.substr(num_start, i - num_start)).c_str(), nullptr);
    std::size_t j = i;
    if (j < text.size() && text[j] == ' ') ++j;

    bool percent = false, area = false;
    std::size_t unit_end = j;
    if (j < text.size() && text[j] == '%') {
      percent = true;
      unit_end = j + 1;
    } else if (text.substr(j, 3) == "\xef\xbc\x85") {  // fullwidth percent
      percent = true;
      unit_end = j + 3;
    } else if (text.substr(j, 3) == "m\xc2\xb2") {  // m + superscript two
      area = true;
      unit_end = j + 3;
    } else if (text.substr(j, 3) == "\xe3\x8e\xa1") {  // square-meter sign
      area = true;
      unit_end = j + 3;
    } else if (text.substr(j, 2) == "m2" &&
               (j + 2 >= text.size() ||
                !ascii_word_byte(static_cast<unsigned char>(text[j + 2])))) {
      area = true;
      unit_end = j + 2;
    }
    if (percent || area) {
      const double threshold =
          percent ? bands.percent_threshold : bands.area_threshold_m2;
      const std::string* band = value >= threshold ? &bands.at_or_above : &bands.below;
      out.push_back({{num_start, unit_end}, band});
      i = unit_end;
    }
  }
}

}  // namespace

std::vector<TextSpan> detect_negation_spans(std::string_view text,
                                            const Vocabulary& vocab) {
  std::vector<TextSpan> out;
  if (vocab.negation_markers.empty() || text.empty()) return out;
  for (const auto& clause : clause_spans(text)) {
    const std::string_view body = text.substr(clause.begin, clause.end - clause.begin);
    for (const auto& marker : vocab.negation_markers) {
      if (contains_term(body, marker)) {
        out.push_back(clause);
        break;
      }
    }
  }
  return out;
}

StructuredAttributes extract_attributes(std::string_view text, const Vocabulary& vocab,
                                        std::vector<std::string>* warnings) {
  StructuredAttributes a;
  if (text.empty()) return a;
  const std::vector<TextSpan> negated = detect_negation_spans(text, vocab);

  std::vector<Cand> members, damages, locations, severities, extents;
  collect_surface_matches(text, vocab.members, members);
  collect_surface_matches(text, vocab.damages, damages);
  collect_surface_matches(text, vocab.locations, locations);
  collect_surface_matches(text, vocab.severities, severities);
  collect_surface_matches(text, vocab.extents, extents);
  collect_numeric_extents(text, vocab.numeric_bands, extents);
  for (auto* cands : {&members, &damages, &locations, &severities, &extents})
    drop_negated(*cands, negated);

  const Cand* member = pick_best(members);
  if (member) a.member = *member->canonical;

  // One mention cannot be both the member and the location: skip the member's
  // own span, so "on deck" alone yields member=deck, location empty, while
  // "girder bottom face" (a longer span) still counts as a location.
  if (member) {
    std::erase_if(locations, [&](const Cand& c) { return c.span == member->span; });
  }
  if (const Cand* loc = pick_best(locations)) a.location = *loc->canonical;

  if (const Cand* sev = pick_best(severities)) {
    a.severity = *sev->canonical;
    if (warnings) {
      for (const auto& c : severities) {
        if (*c.canonical != *sev->canonical) {
          warnings->push_back("conflicting severity mentions; kept \"" + *sev->canonical +
                              "\" (earliest)");
          break;
        }
      }
    }
  }

  if (const Cand* ext = pick_best(extents)) a.extent = *ext->canonical;

  // Damages: every mentioned canonical, ordered by its earliest occurrence.
  struct DamagePick {
    TextSpan span;
    const std::string* canonical;
  };
  std::vector<DamagePick> picks;
  for (const auto& c : damages) {
    auto it = std::find_if(picks.begin(), picks.end(), [&](const DamagePick& p) {
      return *p.canonical == *c.canonical;
    });
    if (it == picks.end()) {
      picks.push_back({c.span, c.canonical});
    } else if (c.span.begin < it->span.begin ||
               (c.span.begin == it->span.begin && c.span.end > it->span.end)) {
      it->span = c.span;
    }
  }
  std::sort(picks.begin(), picks.end(), [](const DamagePick& x, const DamagePick& y) {
    if (x.span.begin != y.span.begin) return x.span.begin < y.span.begin;
    if (x.span.end != y.span.end) return x.span.end > y.span.end;
    return *x.canonical < *y.canonical;
  });
  for (const auto& p : picks) a.damages.push_back(*p.canonical);
  return a;
}

std::string canonical_rendering(const StructuredAttributes& a) {
  std::string head;
  for (std::size_t i = 0; i < a.damages.size(); ++i) {
    if (i) head += " and ";
    head += a.damages[i];
  }
  if (a.member) {
    head += head.empty() ? "on " : " on ";
    head += *a.member;
  }
  std::string out = head;
  auto append = [&](const std::string& part) {
    if (!out.empty()) out += ", ";
    out += part;
  };
  if (a.location) append(*a.location);
  if (a.severity) append("severity " + *a.severity);
  if (a.extent) append("extent " + *a.extent);
  return out;
}

std::string attributes_json(const StructuredAttributes& a) {
  nlohmann::json j;
  j["member"] = a.member ? nlohmann::json(*a.member) : nlohmann::json(nullptr);
  j["damage"] = a.damages;
  j["location"] = a.location ? nlohmann::json(*a.location) : nlohmann::json(nullptr);
  j["severity"] = a.severity ? nlohmann::json(*a.severity) : nlohmann::json(nullptr);
  j["extent"] = a.extent ? nlohmann::json(*a.extent) : nlohmann::json(nullptr);
  return j.dump();
}

FrequencyTables attribute_frequencies(const std::vector<StructuredAttributes>& attrs) {
  FrequencyTables t;
  t.total = attrs.size();
  for (const auto& a : attrs) {
    if (a.member) t.member_counts[*a.member]++;
    for (const auto& d : a.damages) {
      t.damage_counts[d]++;
      if (a.member) t.cooccurrence[{*a.member, d}]++;
    }
  }
  return t;
}

std::vector<std::pair<std::string, std::size_t>> top_counts(
    const std::map<std::string, std::size_t>& table, std::size_t n) {
  std::vector<std::pair<std::string, std::size_t>> rows(table.begin(), table.end());
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  if (rows.size() > n) rows.resize(n);
  return rows;
}

}  // namespace bridgescore
