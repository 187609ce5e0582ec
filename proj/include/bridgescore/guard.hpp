#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bridgescore/backend_iface.hpp"
#include "bridgescore/parallel.hpp"
#include "bridgescore/record.hpp"

namespace bridgescore {

struct RepetitionParams {
  std::size_t ngram_len = 8;        // shortest n-gram that can count as a repeat
  std::size_t min_occurrences = 3;  // how often it must occur
  double coverage_min = 0.30;       // fraction of tokens its occurrences must cover

  bool operator==(const RepetitionParams&) const = default;
};

struct GuardConfig {
  std::size_t theta_low = 98;
  std::size_t theta_high = 202;
  // The published outcome counts require overlong descriptions to pass on to
  // the judge; flip this on to enforce the upper window edge too.
  bool reject_above_high = false;
  RepetitionParams repetition;
  std::vector<std::string> damage_keywords;
  std::vector<std::string> vague_phrases;
  // Camera/lens-condition phrases; used only by the calibration census to
  // separate "Dirty or Noisy image" from plain repetitive output.
  std::vector<std::string> dirty_phrases;
  std::string scope_prompt_id = "scope_v1";

  bool operator==(const GuardConfig&) const = default;
};

std::vector<std::string> validate_guard_config(const GuardConfig& cfg);
GuardConfig parse_guard_config_yaml(const std::string& text);
GuardConfig load_guard_config(const std::string& path);

enum class GuardVerdict { pass, fail };

enum class GuardReason {
  high_quality,
  high_quality_rule_only,
  no_such_file,
  short_description,
  dirty_or_noisy_image,
  not_recognised_from_only_image,
};

const char* guard_verdict_string(GuardVerdict v);
const char* guard_reason_string(GuardReason r);

struct GuardOutcome {
  GuardVerdict verdict = GuardVerdict::pass;
  GuardReason reason = GuardReason::high_quality;
  int stage = 1;  // 0 = file rule, 1 = deterministic rules, 2 = judge
  std::optional<std::string> judge_raw;
  std::optional<std::string> note;

  bool operator==(const GuardOutcome&) const = default;
};

struct RepetitionReport {
  bool flag = false;
  double coverage = 0.0;
  std::string witness;            // winning n-gram, tokens joined by spaces
  std::size_t occurrences = 0;
  std::size_t ngram_len = 0;
};

/// True iff some token n-gram of length >= ngram_len occurs >= min_occurrences
/// times and its (possibly overlapping) occurrences cover >= coverage_min of
/// the tokens. The witness is the highest-coverage qualifying n-gram; ties
/// prefer the shorter n-gram, then the earliest occurrence.
RepetitionReport detect_repetition(std::string_view text, const RepetitionParams& params);

/// Deterministic rules, in order: (0) referenced image file missing,
/// (1) token window, (2) repetition, (3) no damage keyword plus a vague
/// phrase. Empty return means "continue to the judge".
std::optional<GuardOutcome> stage1(const InspectionRecord& record, const GuardConfig& cfg);

enum class ProtocolErrorKind { missing_line, unknown_verdict, unknown_reason, inconsistent_reason };

const char* protocol_error_kind_string(ProtocolErrorKind kind);

/// A judge response that does not follow the two-line verdict contract.
class JudgeProtocolViolation : public std::runtime_error {
 public:
  JudgeProtocolViolation(ProtocolErrorKind kind, std::string raw, const std::string& message)
      : std::runtime_error(message), kind_(kind), raw_(std::move(raw)) {}

  ProtocolErrorKind kind() const { return kind_; }
  const std::string& raw() const { return raw_; }

 private:
  ProtocolErrorKind kind_;
  std::string raw_;
};

struct ParsedVerdict {
  GuardVerdict verdict = GuardVerdict::pass;
  GuardReason reason = GuardReason::high_quality;

  bool operator==(const ParsedVerdict&) const = default;
};

/// Parse the two-line verdict: the first line starting with "VERDICT:" and
/// the first later line starting with "REASON_CODE:" (both case-sensitive).
/// Whitespace around values and content after the two lines are tolerated.
/// Throws JudgeProtocolViolation (missing_line / unknown_verdict /
/// unknown_reason). Verdict/reason consistency is checked by stage2, not
/// here, so all 2x4 keyword combinations parse.
ParsedVerdict parse_verdict(const std::string& raw);

/// Ask the judge and turn its answer into an outcome. Throws
/// JudgeProtocolViolation when the response is unparseable or pairs a
/// verdict with a reason from the wrong side (inconsistent_reason).
GuardOutcome stage2(const std::string& id, const std::string& text,
                    JudgeBackend& judge, const GuardConfig& cfg);

/// Stage 1, then the judge for survivors. A null judge runs rule-only mode:
/// survivors pass with the rule-only reason and the judge is never involved.
GuardOutcome guard_record(const InspectionRecord& record, const GuardConfig& cfg,
                          JudgeBackend* judge);

/// guard_record over a whole set; results are index-aligned with the input
/// and identical in both execution modes.
std::vector<GuardOutcome> guard_sweep(const RecordSet& records, const GuardConfig& cfg,
                                      JudgeBackend* judge,
                                      ExecMode mode = ExecMode::serial);

struct OutcomeRow {
  GuardVerdict verdict = GuardVerdict::pass;
  GuardReason reason = GuardReason::high_quality;
  std::size_t count = 0;
  std::int64_t percent_tenths = 0;

  bool operator==(const OutcomeRow&) const = default;
};

struct OutcomeTable {
  std::size_t total = 0;
  std::vector<OutcomeRow> rows;  // count desc, ties by reason string
  std::size_t pass_total = 0;
  std::size_t fail_total = 0;
  std::int64_t pass_percent_tenths = 0;
  std::int64_t fail_percent_tenths = 0;
};

OutcomeTable aggregate_outcomes(const std::vector<GuardOutcome>& outcomes);

/// Text-pattern census used while calibrating the token window. Unlike the
/// guard itself this labels overlong output and camera-condition phrases
/// separately, and never looks at the filesystem.
enum class CalibrationLabel {
  acceptable,
  short_description,
  overly_long,
  repetitive,
  dirty_or_noisy,
  not_recognised,
};

const char* calibration_label_string(CalibrationLabel label);

CalibrationLabel calibration_label(const InspectionRecord& record, const GuardConfig& cfg);

struct CalibrationRow {
  CalibrationLabel label = CalibrationLabel::acceptable;
  std::size_t count = 0;
  std::int64_t percent_tenths = 0;

  bool operator==(const CalibrationRow&) const = default;
};

struct CalibrationCensus {
  std::size_t total = 0;
  std::vector<CalibrationRow> rows;  // one row per label, fixed label order
  std::size_t low_quality_total = 0;
  std::int64_t low_quality_percent_tenths = 0;
};

CalibrationCensus calibration_census(const RecordSet& records, const GuardConfig& cfg,
                                     ExecMode mode = ExecMode::serial);

}  // namespace bridgescore
