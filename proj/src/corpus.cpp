#include "bridgescore/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "bridgescore/csv.hpp"
#include "bridgescore/stats.hpp"
#include "bridgescore/textmatch.hpp"
#include "json.hpp"

namespace bridgescore {
namespace {

constexpr const char* kColumns[] = {"image_id", "image_path", "ground_truth_text",
                                    "prediction_text", "token_count"};

std::optional<int> parse_token_count(const std::string& cell, std::string& err) {
  int value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || value < 0) {
    err = "token_count must be a non-negative integer, got \"" + cell + "\"";
    return std::nullopt;
  }
  return value;
}

LoadResult load_csv(std::istream& in, const std::string& provenance) {
  LoadResult out;
  out.set.provenance = provenance;
  CsvReader reader(in);

  std::vector<std::string> row;
  try {
    if (!reader.next(row)) throw CorpusError("missing header row / image_id column");
  } catch (const CsvParseError& e) {
    throw CorpusError(std::string("unreadable csv: ") + e.what());
  }

  // Column positions; -1 = absent. Only image_id is mandatory.
  int col[5] = {-1, -1, -1, -1, -1};
  for (std::size_t i = 0; i < row.size(); ++i) {
    for (int c = 0; c < 5; ++c) {
      if (row[i] == kColumns[c]) col[c] = static_cast<int>(i);
    }
  }
  if (col[0] < 0) throw CorpusError("missing required image_id column");

  std::set<std::string> seen;
  auto cell = [&](int c) -> std::string {
    return (col[c] >= 0 && static_cast<std::size_t>(col[c]) < row.size())
               ? row[static_cast<std::size_t>(col[c])]
               : std::string();
  };

  for (;;) {
    bool more;
    try {
      more = reader.next(row);
    } catch (const CsvParseError& e) {
      // A structural quoting error makes later row boundaries ambiguous.
      throw CorpusError(std::string("unreadable csv: ") + e.what());
    }
    if (!more) break;

    InspectionRecord rec;
    rec.image_id = cell(0);
    if (rec.image_id.empty()) {
      out.row_errors.push_back({reader.row_line(), "empty image_id"});
      continue;
    }
    std::string err;
    if (std::string v = cell(4); !v.empty()) {
      rec.token_count = parse_token_count(v, err);
      if (!rec.token_count) {
        out.row_errors.push_back({reader.row_line(), err});
        continue;
      }
    }
    if (!seen.insert(rec.image_id).second)
      throw CorpusError("duplicate image_id: " + rec.image_id);
    if (std::string v = cell(1); !v.empty()) rec.image_path = v;
    if (std::string v = cell(2); !v.empty()) rec.ground_truth_text = v;
    if (std::string v = cell(3); !v.empty()) rec.prediction_text = v;
    out.set.records.push_back(std::move(rec));
  }
  return out;
}

LoadResult load_jsonl(std::istream& in, const std::string& provenance) {
  LoadResult out;
  out.set.provenance = provenance;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      out.row_errors.push_back({line_no, "not a JSON object"});
      continue;
    }
    InspectionRecord rec;
    if (!j.contains("image_id") || !j["image_id"].is_string() ||
        j["image_id"].get<std::string>().empty()) {
      out.row_errors.push_back({line_no, "missing or empty image_id"});
      continue;
    }
    rec.image_id = j["image_id"].get<std::string>();
    bool bad = false;
    auto take_str = [&](const char* key, std::optional<std::string>& dst) {
      if (!j.contains(key) || j[key].is_null()) return;
      if (!j[key].is_string()) {
        out.row_errors.push_back({line_no, std::string(key) + " must be a string"});
        bad = true;
        return;
      }
      dst = j[key].get<std::string>();
    };
    take_str("image_path", rec.image_path);
    take_str("ground_truth_text", rec.ground_truth_text);
    take_str("prediction_text", rec.prediction_text);
    if (j.contains("token_count") && !j["token_count"].is_null()) {
      if (!j["token_count"].is_number_integer() || j["token_count"].get<long long>() < 0) {
        out.row_errors.push_back({line_no, "token_count must be a non-negative integer"});
        bad = true;
      } else {
        rec.token_count = static_cast<int>(j["token_count"].get<long long>());
      }
    }
    if (bad) continue;
    if (!seen.insert(rec.image_id).second)
      throw CorpusError("duplicate image_id: " + rec.image_id);
    out.set.records.push_back(std::move(rec));
  }
  return out;
}

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

/// True when the text is built entirely from the configured placeholder
/// strings and whitespace, with at least one placeholder present.
bool placeholder_only(const std::string& text, const std::vector<std::string>& patterns) {
  if (patterns.empty()) return false;
  std::vector<std::string> pats = patterns;
  std::sort(pats.begin(), pats.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  std::size_t i = 0;
  bool matched_any = false;
  while (i < text.size()) {
    if (is_space_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (text.compare(i, 3, "\xe3\x80\x80") == 0) {  // ideographic space
      i += 3;
      continue;
    }
    bool matched = false;
    for (const auto& p : pats) {
      if (!p.empty() && text.compare(i, p.size(), p) == 0) {
        i += p.size();
        matched = true;
        matched_any = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return matched_any;
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& label) {
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(seed >> (8 * b));
  std::uint64_t h = fnv1a64(bytes, sizeof bytes);
  // Continue the same FNV stream over the label.
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

LoadResult load_records(const std::string& path, RecordFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path);
  return load_records(in, format, (format == RecordFormat::csv ? "csv:" : "jsonl:") + path);
}

LoadResult load_records(std::istream& in, RecordFormat format,
                        const std::string& provenance) {
  return format == RecordFormat::csv ? load_csv(in, provenance)
                                     : load_jsonl(in, provenance);
}

void save_records_csv(const RecordSet& rs, std::ostream& out) {
  CsvWriter w(out);
  w.row({"image_id", "image_path", "ground_truth_text", "prediction_text", "token_count"});
  for (const auto& r : rs.records) {
    w.row({r.image_id, r.image_path.value_or(""), r.ground_truth_text.value_or(""),
           r.prediction_text.value_or(""),
           r.token_count ? std::to_string(*r.token_count) : std::string()});
  }
}

void save_records_csv(const RecordSet& rs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path);
  save_records_csv(rs, out);
}

void validate_filter_config(const FilterConfig& cfg) {
  if (cfg.min_chars <= 0 || cfg.min_chars >= cfg.max_chars)
    throw ConfigError("filter requires 0 < min_chars < max_chars");
  if (cfg.member_terms.empty()) throw ConfigError("filter member_terms must be non-empty");
  if (cfg.damage_terms.empty()) throw ConfigError("filter damage_terms must be non-empty");
}

FilterResult filter_quality(const RecordSet& rs, const FilterConfig& cfg) {
  validate_filter_config(cfg);
  FilterResult out;
  out.accepted.provenance = rs.provenance;

  for (const auto& rec : rs.records) {
    const std::string text = rec.ground_truth_text
                                 ? *rec.ground_truth_text
                                 : rec.prediction_text.value_or("");
    std::string reason;
    if (placeholder_only(text, cfg.invalid_patterns)) {
      reason = "invalid_pattern";
    } else {
      const std::size_t chars = utf8_length(text);
      if (chars < static_cast<std::size_t>(cfg.min_chars)) {
        reason = "too_short";
      } else if (chars > static_cast<std::size_t>(cfg.max_chars)) {
        reason = "too_long";
      } else if (!contains_any_term(text, cfg.member_terms)) {
        reason = "no_member_term";
      } else if (!contains_any_term(text, cfg.damage_terms)) {
        reason = "no_damage_term";
      }
    }
    if (reason.empty()) {
      out.accepted.records.push_back(rec);
    } else {
      out.rejected.push_back({rec.image_id, reason});
    }
  }
  return out;
}

void write_rejection_log(const std::vector<Rejection>& rejected, std::ostream& out) {
  CsvWriter w(out);
  w.row({"image_id", "reason"});
  for (const auto& r : rejected) w.row({r.image_id, r.reason});
}

RecordSet stratified_sample(const RecordSet& rs, std::size_t n, std::uint64_t seed,
                            const StrataFn& strata_fn) {
  if (n > rs.size())
    throw std::invalid_argument("sample size exceeds record count");

  // Group record indices by stratum label; std::map iteration gives the
  // lexicographic order the remainder tie-break relies on.
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < rs.records.size(); ++i) {
    auto [member, damage] = strata_fn(rs.records[i]);
    if (member.empty()) member = "other";
    if (damage.empty()) damage = "other";
    strata[member + "|" + damage].push_back(i);
  }

  // Largest-remainder allocation of n across strata.
  struct Alloc {
    const std::string* label;
    const std::vector<std::size_t>* members;
    std::size_t quota;
    std::size_t remainder;  // of n*size mod N
  };
  const std::size_t total = rs.size();
  std::vector<Alloc> allocs;
  allocs.reserve(strata.size());
  std::size_t assigned = 0;
  for (const auto& [label, members] : strata) {
    const std::size_t num = n * members.size();
    Alloc a{&label, &members, num / total, num % total};
    assigned += a.quota;
    allocs.push_back(a);
  }
  std::vector<std::size_t> order(allocs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (allocs[a].remainder != allocs[b].remainder)
      return allocs[a].remainder > allocs[b].remainder;
    return *allocs[a].label < *allocs[b].label;
  });
  for (std::size_t k = 0; assigned < n; ++k) {
    ++allocs[order[k % order.size()]].quota;
    ++assigned;
  }

  // Draw each stratum's quota with its own seeded shuffle.
  std::vector<char> selected(rs.size(), 0);
  for (const auto& a : allocs) {
    std::vector<std::size_t> idx = *a.members;
    DetRng rng(mix_seed(seed, *a.label));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < a.quota && k < idx.size(); ++k) selected[idx[k]] = 1;
  }

  RecordSet out;
  out.provenance = rs.provenance + "; stratified sample n=" + std::to_string(n) +
                   " seed=" + std::to_string(seed);
  for (std::size_t i = 0; i < rs.records.size(); ++i)
    if (selected[i]) out.records.push_back(rs.records[i]);
  return out;
}

std::pair<RecordSet, RecordSet> split_train_val(const RecordSet& rs,
                                                double val_fraction,
                                                std::uint64_t seed) {
  if (rs.empty()) throw std::invalid_argument("cannot split an empty record set");
  if (!(val_fraction > 0.0) || !(val_fraction < 1.0))
    throw std::invalid_argument("val_fraction must be in (0, 1)");

  const std::size_t n = rs.size();
  const auto n_val = static_cast<std::size_t>(
      std::floor(val_fraction * static_cast<double>(n) + 0.5));

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  DetRng rng(seed);
  rng.shuffle(idx);

  std::vector<char> in_val(n, 0);
  for (std::size_t k = 0; k < n_val; ++k) in_val[idx[k]] = 1;

  std::pair<RecordSet, RecordSet> out;
  out.first.provenance = rs.provenance + "; train split";
  out.second.provenance = rs.provenance + "; val split";
  for (std::size_t i = 0; i < n; ++i)
    (in_val[i] ? out.second : out.first).records.push_back(rs.records[i]);
  return out;
}

std::vector<int> token_counts(const RecordSet& rs, const TokenizerConfig& tok) {
  std::vector<int> counts;
  counts.reserve(rs.size());
  for (const auto& r : rs.records) {
    if (r.token_count) {
      counts.push_back(*r.token_count);
    } else if (r.prediction_text) {
      counts.push_back(static_cast<int>(count_tokens(*r.prediction_text, tok)));
    } else {
      throw CorpusError("record " + r.image_id + " has neither token_count nor prediction_text");
    }
  }
  return counts;
}

TokenStats token_stats(const RecordSet& rs, const TokenizerConfig& tok,
                       double rank_low, double rank_high) {
  if (rs.empty()) throw std::invalid_argument("token stats of an empty record set");
  const std::vector<int> counts = token_counts(rs, tok);
  const Moments m = compute_moments(counts);
  TokenStats s;
  s.n = counts.size();
  s.mean = m.mean;
  s.std_dev = m.stddev;
  s.median = m.median;
  s.p_low = nearest_rank_percentile(counts, rank_low);
  s.p_high = nearest_rank_percentile(counts, rank_high);
  s.percentile_ranks = {rank_low, rank_high};
  return s;
}

std::pair<int, int> calibrate_thresholds(const std::vector<int>& counts,
                                         double rank_low, double rank_high) {
  if (counts.empty()) throw std::invalid_argument("calibration requires a non-empty sample");
  return {nearest_rank_percentile(counts, rank_low),
          nearest_rank_percentile(counts, rank_high)};
}

}  // namespace bridgescore
