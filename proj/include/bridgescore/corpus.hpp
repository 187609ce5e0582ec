#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bridgescore/errors.hpp"
#include "bridgescore/record.hpp"
#include "bridgescore/tokenize.hpp"

namespace bridgescore {

// ============================================================================
// Loading
// ============================================================================

enum class RecordFormat { csv, jsonl };

/// Fatal ingest problems: unreadable source, missing image_id column,
/// duplicate image_id.
class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(const std::string& what) : std::runtime_error(what) {}
};

/// A malformed row that was skipped (bad field count, empty id, non-numeric
/// token_count, unparseable JSON line). Line numbers are 1-based and count
/// the header for CSV.
struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  RecordSet set;
  std::vector<RowError> row_errors;
};

LoadResult load_records(const std::string& path, RecordFormat format);
LoadResult load_records(std::istream& in, RecordFormat format,
                        const std::string& provenance);

/// Writes the canonical CSV layout (image_id, image_path, ground_truth_text,
/// prediction_text, token_count); absent fields become empty cells so a
/// round-trip reproduces the set record-for-record in order.
void save_records_csv(const RecordSet& rs, std::ostream& out);
void save_records_csv(const RecordSet& rs, const std::string& path);

// ============================================================================
// Quality filtering
// ============================================================================

struct FilterConfig {
  int min_chars = 15;
  int max_chars = 500;
  std::vector<std::string> invalid_patterns;  // literal placeholder strings
  std::vector<std::string> member_terms;
  std::vector<std::string> damage_terms;
};

void validate_filter_config(const FilterConfig& cfg);

struct Rejection {
  std::string image_id;
  std::string reason;  // invalid_pattern | too_short | too_long | no_member_term | no_damage_term
};

struct FilterResult {
  RecordSet accepted;
  std::vector<Rejection> rejected;
};

/// Applies the three data-quality filters to each record's ground-truth text
/// (prediction text when no ground truth is present). Reported reason is the
/// first failing rule in the order: placeholder-only text, length bounds,
/// member-term presence, damage-term presence.
FilterResult filter_quality(const RecordSet& rs, const FilterConfig& cfg);

void write_rejection_log(const std::vector<Rejection>& rejected, std::ostream& out);

// ============================================================================
// Sampling and splits
// ============================================================================

/// Maps a record to its (member, damage) stratum labels. Empty components are
/// folded to "other" before strata are formed.
using StrataFn =
    std::function<std::pair<std::string, std::string>(const InspectionRecord&)>;

/// Proportional stratified sample of size n. Per-stratum quotas come from
/// largest-remainder rounding (remainder ties broken by stratum name);
/// within-stratum selection is a seeded shuffle, independent per stratum, so
/// adding a stratum never perturbs the draw of another. Output preserves the
/// original record order.
RecordSet stratified_sample(const RecordSet& rs, std::size_t n, std::uint64_t seed,
                            const StrataFn& strata_fn);

/// Seeded split into (train, val) with |val| = round(val_fraction * n),
/// half-up. Both halves preserve the original record order.
std::pair<RecordSet, RecordSet> split_train_val(const RecordSet& rs,
                                                double val_fraction,
                                                std::uint64_t seed);

// ============================================================================
// Token statistics and threshold calibration
// ============================================================================

struct TokenStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double median = 0.0;
  int p_low = 0;
  int p_high = 0;
  std::pair<double, double> percentile_ranks{5.0, 95.0};
};

/// Per-record token counts for a set: the token_count column when present,
/// otherwise the configured tokenizer run over prediction_text. A record with
/// neither is an error.
std::vector<int> token_counts(const RecordSet& rs, const TokenizerConfig& tok);

TokenStats token_stats(const RecordSet& rs, const TokenizerConfig& tok,
                       double rank_low = 5.0, double rank_high = 95.0);

/// Nearest-rank percentile thresholds (θ_low, θ_high) from raw token counts.
std::pair<int, int> calibrate_thresholds(const std::vector<int>& counts,
                                         double rank_low = 5.0,
                                         double rank_high = 95.0);

}  // namespace bridgescore
