#include "bridgescore/guard.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "bridgescore/errors.hpp"
#include "bridgescore/numfmt.hpp"
#include "bridgescore/textmatch.hpp"
#include "bridgescore/tokenize.hpp"

namespace bridgescore {

namespace {

std::size_t guarded_token_count(const InspectionRecord& record) {
  if (record.token_count) return *record.token_count;
  if (record.prediction_text) return count_tokens(*record.prediction_text);
  return 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

void parse_string_list(const YAML::Node& node, const char* name,
                       std::vector<std::string>& out, std::vector<std::string>& problems) {
  if (!node) return;
  if (!node.IsSequence()) {
    problems.push_back(std::string("'") + name + "' must be a sequence of strings");
    return;
  }
  for (const auto& item : node) {
    try {
      out.push_back(item.as<std::string>());
    } catch (const YAML::Exception&) {
      problems.push_back(std::string("'") + name + "' has a non-string entry");
    }
  }
}

}  // namespace

std::vector<std::string> validate_guard_config(const GuardConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.theta_low > cfg.theta_high)
    problems.push_back("token window inverted: theta_low " + std::to_string(cfg.theta_low) +
                       " > theta_high " + std::to_string(cfg.theta_high));
  if (cfg.repetition.ngram_len < 2)
    problems.push_back("repetition ngram_len must be >= 2 (got " +
                       std::to_string(cfg.repetition.ngram_len) + ")");
  if (cfg.repetition.min_occurrences < 1)
    problems.push_back("repetition min_occurrences must be >= 1");
  if (!(cfg.repetition.coverage_min > 0.0 && cfg.repetition.coverage_min <= 1.0))
    problems.push_back("repetition coverage_min must lie in (0,1] (got " +
                       format_fixed(cfg.repetition.coverage_min, 4) + ")");
  if (cfg.scope_prompt_id.empty())
    problems.push_back("scope_prompt_id must not be empty");
  return problems;
}

GuardConfig parse_guard_config_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid guard config:\n  - YAML parse error: ") + e.what());
  }

  std::vector<std::string> problems;
  GuardConfig cfg;

  if (!root.IsMap() && !root.IsNull()) {
    problems.push_back("top level must be a mapping");
  } else if (root.IsMap()) {
    static const std::array<std::string, 8> known = {
        "theta_low",       "theta_high",    "reject_above_high", "repetition",
        "damage_keywords", "vague_phrases", "dirty_phrases",     "scope_prompt_id"};
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>("");
      if (std::find(known.begin(), known.end(), key) == known.end())
        problems.push_back("unknown top-level key '" + key + "'");
    }

    auto read_size = [&](const char* name, std::size_t& out) {
      if (!root[name]) return;
      try {
        const long long v = root[name].as<long long>();
        if (v < 0) {
          problems.push_back(std::string("'") + name + "' must be non-negative");
          return;
        }
        out = static_cast<std::size_t>(v);
      } catch (const YAML::Exception&) {
        problems.push_back(std::string("'") + name + "' must be an integer");
      }
    };
    read_size("theta_low", cfg.theta_low);
    read_size("theta_high", cfg.theta_high);

    if (root["reject_above_high"]) {
      try {
        cfg.reject_above_high = root["reject_above_high"].as<bool>();
      } catch (const YAML::Exception&) {
        problems.push_back("'reject_above_high' must be a boolean");
      }
    }

    const YAML::Node rep = root["repetition"];
    if (rep) {
      if (!rep.IsMap()) {
        problems.push_back("'repetition' must be a mapping");
      } else {
        static const std::array<std::string, 3> rep_keys = {"ngram_len", "min_occurrences",
                                                            "coverage_min"};
        for (const auto& kv : rep) {
          const std::string key = kv.first.as<std::string>("");
          if (std::find(rep_keys.begin(), rep_keys.end(), key) == rep_keys.end())
            problems.push_back("repetition block has unknown key '" + key + "'");
        }
        auto read_rep_size = [&](const char* name, std::size_t& out) {
          if (!rep[name]) return;
          try {
            const long long v = rep[name].as<long long>();
            if (v < 0) {
              problems.push_back(std::string("repetition ") + name + " must be non-negative");
              return;
            }
            out = static_cast<std::size_t>(v);
          } catch (const YAML::Exception&) {
            problems.push_back(std::string("repetition ") + name + " must be an integer");
          }
        };
        read_rep_size("ngram_len", cfg.repetition.ngram_len);
        read_rep_size("min_occurrences", cfg.repetition.min_occurrences);
        if (rep["coverage_min"]) {
          try {
            cfg.repetition.coverage_min = rep["coverage_min"].as<double>();
          } catch (const YAML::Exception&) {
            problems.push_back("repetition coverage_min must be a number");
          }
        }
      }
    }

    parse_string_list(root["damage_keywords"], "damage_keywords", cfg.damage_keywords, problems);
    parse_string_list(root["vague_phrases"], "vague_phrases", cfg.vague_phrases, problems);
    parse_string_list(root["dirty_phrases"], "dirty_phrases", cfg.dirty_phrases, problems);

    if (root["scope_prompt_id"]) {
      try {
        cfg.scope_prompt_id = root["scope_prompt_id"].as<std::string>();
      } catch (const YAML::Exception&) {
        problems.push_back("'scope_prompt_id' must be a string");
      }
    }
  }

  auto semantic = validate_guard_config(cfg);
  problems.insert(problems.end(), semantic.begin(), semantic.end());
  if (!problems.empty()) {
    std::string message = "invalid guard config:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw ConfigError(message);
  }
  return cfg;
}

GuardConfig load_guard_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open guard config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_guard_config_yaml(buf.str());
}

const char* guard_verdict_string(GuardVerdict v) {
  return v == GuardVerdict::pass ? "PASS" : "FAIL";
}

const char* guard_reason_string(GuardReason r) {
  switch (r) {
    case GuardReason::high_quality: return "High Quality";
    case GuardReason::high_quality_rule_only: return "High Quality (rule-only)";
    case GuardReason::no_such_file: return "No such file or directory";
    case GuardReason::short_description: return "Short description";
    case GuardReason::dirty_or_noisy_image: return "Dirty or Noisy image";
    case GuardReason::not_recognised_from_only_image: return "Not recognised from only image";
  }
  return "High Quality";
}

RepetitionReport detect_repetition(std::string_view text, const RepetitionParams& params) {
  RepetitionReport report;
  const std::vector<std::string> tokens = tokenize(text);
  const std::size_t total = tokens.size();
  const std::size_t n_min = params.ngram_len;
  if (n_min < 1 || total < n_min || params.min_occurrences < 1) return report;
  if (total < params.min_occurrences) return report;

  // Token ids so the rolling hash runs over integers.
  std::unordered_map<std::string_view, std::uint64_t> id_of;
  std::vector<std::uint64_t> seq(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto [it, inserted] = id_of.emplace(tokens[i], id_of.size() + 1);
    seq[i] = it->second;
  }

  constexpr std::uint64_t kMul = 0x9e3779b97f4a7c15ull;
  std::vector<std::uint64_t> prefix(total + 1, 0);
  std::vector<std::uint64_t> power(total + 1, 1);
  for (std::size_t i = 0; i < total; ++i) {
    prefix[i + 1] = prefix[i] * kMul + seq[i];
    power[i + 1] = power[i] * kMul;
  }
  auto window_hash = [&](std::size_t begin, std::size_t n) {
    return prefix[begin + n] - prefix[begin] * power[n];
  };

  // Largest n that can still occur min_occurrences times (occurrences may
  // overlap, so only the window count limits it).
  const std::size_t n_max = total - params.min_occurrences + 1;

  struct Candidate {
    double coverage = -1.0;
    std::size_t first = 0;
    std::size_t count = 0;
  };

  bool have_best = false;
  Candidate best;
  std::size_t best_n = 0;

  for (std::size_t n = n_min; n <= n_max; ++n) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> groups;
    const std::size_t windows = total - n + 1;
    groups.reserve(windows);
    for (std::size_t i = 0; i < windows; ++i) groups[window_hash(i, n)].push_back(i);

    Candidate local;
    for (const auto& [hash, rough] : groups) {
      if (rough.size() < params.min_occurrences) continue;
      // Hash groups are verified: positions are partitioned by actual token
      // content before counting, so collisions cannot create false repeats.
      std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> exact;
      for (std::size_t pos : rough)
        exact[std::vector<std::uint64_t>(seq.begin() + pos, seq.begin() + pos + n)]
            .push_back(pos);
      for (const auto& [ngram, positions] : exact) {
        if (positions.size() < params.min_occurrences) continue;
        std::size_t covered = 0;
        std::size_t reach = 0;  // positions are ascending
        for (std::size_t pos : positions) {
          const std::size_t lo = std::max(pos, reach);
          const std::size_t hi = pos + n;
          if (hi > lo) covered += hi - lo;
          reach = std::max(reach, hi);
        }
        const double coverage = static_cast<double>(covered) / static_cast<double>(total);
        if (coverage < params.coverage_min) continue;
        if (coverage > local.coverage ||
            (coverage == local.coverage && positions.front() < local.first)) {
          local = {coverage, positions.front(), positions.size()};
        }
      }
    }
    if (local.coverage >= 0.0 && (!have_best || local.coverage > best.coverage)) {
      have_best = true;
      best = local;
      best_n = n;
    }
  }

  if (!have_best) return report;
  report.flag = true;
  report.coverage = best.coverage;
  report.occurrences = best.count;
  report.ngram_len = best_n;
  std::string witness;
  for (std::size_t i = 0; i < best_n; ++i) {
    if (i) witness += ' ';
    witness += tokens[best.first + i];
  }
  report.witness = std::move(witness);
  return report;
}

std::optional<GuardOutcome> stage1(const InspectionRecord& record, const GuardConfig& cfg) {
  if (record.image_path && !record.image_path->empty() &&
      !std::filesystem::exists(*record.image_path)) {
    GuardOutcome out{GuardVerdict::fail, GuardReason::no_such_file, 0, std::nullopt,
                     "image path: " + *record.image_path};
    return out;
  }

  if (!record.prediction_text) {
    GuardOutcome out{GuardVerdict::fail, GuardReason::not_recognised_from_only_image, 1,
                     std::nullopt, "no prediction text on record"};
    return out;
  }
  const std::string& text = *record.prediction_text;
  const std::size_t tokens = guarded_token_count(record);

  if (tokens < cfg.theta_low) {
    GuardOutcome out{GuardVerdict::fail, GuardReason::short_description, 1, std::nullopt,
                     std::to_string(tokens) + " tokens < " + std::to_string(cfg.theta_low)};
    return out;
  }
  if (cfg.reject_above_high && tokens > cfg.theta_high) {
    GuardOutcome out{GuardVerdict::fail, GuardReason::dirty_or_noisy_image, 1, std::nullopt,
                     "overly long description: " + std::to_string(tokens) + " tokens > " +
                         std::to_string(cfg.theta_high)};
    return out;
  }

  RepetitionReport rep = detect_repetition(text, cfg.repetition);
  if (rep.flag) {
    GuardOutcome out{GuardVerdict::fail, GuardReason::dirty_or_noisy_image, 1, std::nullopt,
                     "repetition coverage " + format_fixed(rep.coverage, 2) + ": \"" +
                         rep.witness + "\""};
    return out;
  }

  if (!contains_any_term(text, cfg.damage_keywords) &&
      contains_any_term(text, cfg.vague_phrases)) {
    GuardOutcome out{GuardVerdict::fail, GuardReason::not_recognised_from_only_image, 1,
                     std::nullopt, "no damage keyword and a vague phrase present"};
    return out;
  }

  return std::nullopt;
}

const char* protocol_error_kind_string(ProtocolErrorKind kind) {
  switch (kind) {
    case ProtocolErrorKind::missing_line: return "missing_line";
    case ProtocolErrorKind::unknown_verdict: return "unknown_verdict";
    case ProtocolErrorKind::unknown_reason: return "unknown_reason";
    case ProtocolErrorKind::inconsistent_reason: return "inconsistent_reason";
  }
  return "missing_line";
}

ParsedVerdict parse_verdict(const std::string& raw) {
  constexpr std::string_view kVerdictTag = "VERDICT:";
  constexpr std::string_view kReasonTag = "REASON_CODE:";

  std::optional<std::string> verdict_value;
  std::optional<std::string> reason_value;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t eol = std::min(raw.find('\n', pos), raw.size());
    std::string_view line = trim(std::string_view(raw).substr(pos, eol - pos));
    if (!verdict_value) {
      if (line.substr(0, kVerdictTag.size()) == kVerdictTag)
        verdict_value = std::string(trim(line.substr(kVerdictTag.size())));
    } else if (!reason_value) {
      if (line.substr(0, kReasonTag.size()) == kReasonTag)
        reason_value = std::string(trim(line.substr(kReasonTag.size())));
    }
    if (eol == raw.size()) break;
    pos = eol + 1;
  }

  if (!verdict_value)
    throw JudgeProtocolViolation(ProtocolErrorKind::missing_line, raw,
                                 "judge response has no VERDICT line");
  if (!reason_value)
    throw JudgeProtocolViolation(ProtocolErrorKind::missing_line, raw,
                                 "judge response has no REASON_CODE line after the verdict");

  ParsedVerdict parsed;
  if (*verdict_value == "PASS") {
    parsed.verdict = GuardVerdict::pass;
  } else if (*verdict_value == "FAIL") {
    parsed.verdict = GuardVerdict::fail;
  } else {
    throw JudgeProtocolViolation(ProtocolErrorKind::unknown_verdict, raw,
                                 "unknown verdict '" + *verdict_value + "'");
  }

  if (*reason_value == "High Quality") {
    parsed.reason = GuardReason::high_quality;
  } else if (*reason_value == "Short description") {
    parsed.reason = GuardReason::short_description;
  } else if (*reason_value == "Dirty or Noisy image") {
    parsed.reason = GuardReason::dirty_or_noisy_image;
  } else if (*reason_value == "Not recognised from only image") {
    parsed.reason = GuardReason::not_recognised_from_only_image;
  } else {
    throw JudgeProtocolViolation(ProtocolErrorKind::unknown_reason, raw,
                                 "unknown reason code '" + *reason_value + "'");
  }
  return parsed;
}

GuardOutcome stage2(const std::string& id, const std::string& text,
                    JudgeBackend& judge, const GuardConfig& cfg) {
  const std::string raw = judge.judge({id, text, cfg.scope_prompt_id});
  const ParsedVerdict parsed = parse_verdict(raw);

  const bool pass_side = parsed.reason == GuardReason::high_quality;
  if ((parsed.verdict == GuardVerdict::pass) != pass_side)
    throw JudgeProtocolViolation(
        ProtocolErrorKind::inconsistent_reason, raw,
        std::string("reason code '") + guard_reason_string(parsed.reason) +
            "' is not valid for verdict " + guard_verdict_string(parsed.verdict));

  return {parsed.verdict, parsed.reason, 2, raw, std::nullopt};
}

GuardOutcome guard_record(const InspectionRecord& record, const GuardConfig& cfg,
                          JudgeBackend* judge) {
  if (auto outcome = stage1(record, cfg)) return *outcome;
  if (judge == nullptr)
    return {GuardVerdict::pass, GuardReason::high_quality_rule_only, 1, std::nullopt,
            std::nullopt};
  return stage2(record.image_id, *record.prediction_text, *judge, cfg);
}

std::vector<GuardOutcome> guard_sweep(const RecordSet& records, const GuardConfig& cfg,
                                      JudgeBackend* judge, ExecMode mode) {
  std::vector<GuardOutcome> outcomes(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  parallel_for(records.size(), mode, [&](std::size_t i) {
    try {
      outcomes[i] = guard_record(records.records[i], cfg, judge);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& error : errors)
    if (error) std::rethrow_exception(error);
  return outcomes;
}

OutcomeTable aggregate_outcomes(const std::vector<GuardOutcome>& outcomes) {
  OutcomeTable table;
  table.total = outcomes.size();

  std::map<std::pair<int, int>, OutcomeRow> grouped;
  for (const auto& outcome : outcomes) {
    auto& row = grouped[{static_cast<int>(outcome.verdict), static_cast<int>(outcome.reason)}];
    row.verdict = outcome.verdict;
    row.reason = outcome.reason;
    ++row.count;
    if (outcome.verdict == GuardVerdict::pass)
      ++table.pass_total;
    else
      ++table.fail_total;
  }

  for (auto& [key, row] : grouped) {
    if (table.total > 0) row.percent_tenths = percent_tenths(row.count, table.total);
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const OutcomeRow& a, const OutcomeRow& b) {
    if (a.count != b.count) return a.count > b.count;
    const std::string_view ra = guard_reason_string(a.reason);
    const std::string_view rb = guard_reason_string(b.reason);
    if (ra != rb) return ra < rb;
    return a.verdict < b.verdict;
  });

  if (table.total > 0) {
    table.pass_percent_tenths = percent_tenths(table.pass_total, table.total);
    table.fail_percent_tenths = percent_tenths(table.fail_total, table.total);
  }
  return table;
}

const char* calibration_label_string(CalibrationLabel label) {
  switch (label) {
    case CalibrationLabel::acceptable: return "Acceptable";
    case CalibrationLabel::short_description: return "Short description";
    case CalibrationLabel::overly_long: return "Overly long description";
    case CalibrationLabel::repetitive: return "Repetitive output";
    case CalibrationLabel::dirty_or_noisy: return "Dirty or Noisy image";
    case CalibrationLabel::not_recognised: return "Not recognised from only image";
  }
  return "Acceptable";
}

CalibrationLabel calibration_label(const InspectionRecord& record, const GuardConfig& cfg) {
  if (!record.prediction_text) return CalibrationLabel::not_recognised;
  const std::string& text = *record.prediction_text;
  const std::size_t tokens = guarded_token_count(record);
  if (tokens < cfg.theta_low) return CalibrationLabel::short_description;
  if (tokens > cfg.theta_high) return CalibrationLabel::overly_long;
  if (contains_any_term(text, cfg.dirty_phrases)) return CalibrationLabel::dirty_or_noisy;
  if (detect_repetition(text, cfg.repetition).flag) return CalibrationLabel::repetitive;
  if (!contains_any_term(text, cfg.damage_keywords) &&
      contains_any_term(text, cfg.vague_phrases))
    return CalibrationLabel::not_recognised;
  return CalibrationLabel::acceptable;
}

CalibrationCensus calibration_census(const RecordSet& records, const GuardConfig& cfg,
                                     ExecMode mode) {
  constexpr std::size_t kLabels = 6;
  std::vector<CalibrationLabel> labels(records.size());
  parallel_for(records.size(), mode, [&](std::size_t i) {
    labels[i] = calibration_label(records.records[i], cfg);
  });

  CalibrationCensus census;
  census.total = records.size();
  std::array<std::size_t, kLabels> counts{};
  for (CalibrationLabel label : labels) ++counts[static_cast<std::size_t>(label)];

  for (std::size_t i = 0; i < kLabels; ++i) {
    CalibrationRow row;
    row.label = static_cast<CalibrationLabel>(i);
    row.count = counts[i];
    if (census.total > 0) row.percent_tenths = percent_tenths(row.count, census.total);
    census.rows.push_back(row);
    if (row.label != CalibrationLabel::acceptable) census.low_quality_total += row.count;
  }
  if (census.total > 0)
    census.low_quality_percent_tenths = percent_tenths(census.low_quality_total, census.total);
  return census;
}

}  // namespace bridgescore
