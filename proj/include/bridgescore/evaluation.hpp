#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bridgescore/backend_iface.hpp"
#include "bridgescore/parallel.hpp"
#include "bridgescore/record.hpp"

namespace bridgescore {

/// Failure while computing similarity reports, tagged with what went wrong.
class EvaluationError : public std::runtime_error {
 public:
  enum class Kind { dimension_mismatch, zero_vector, empty_evaluation, missing_vector };

  EvaluationError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// u.v / (|u||v|), clamped to [-1,1] against floating-point drift.
/// Throws on dimension mismatch and on zero vectors.
double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v);

/// Ordered worst-to-best so that tier comparisons follow quality order.
enum class SimilarityTier { very_poor = 0, poor = 1, acceptable = 2, good = 3, excellent = 4 };

const char* similarity_tier_string(SimilarityTier tier);

/// Lower bounds per tier, strictly descending. A similarity at or above a
/// bound earns at least that tier; anything below poor_min is very_poor.
struct TierPreset {
  std::string name;
  double excellent_min = 0.85;
  double good_min = 0.70;
  double acceptable_min = 0.60;
  double poor_min = 0.50;

  bool operator==(const TierPreset&) const = default;
};

/// The thresholds every reported distribution uses; the default everywhere.
TierPreset results_tier_preset();
/// Stricter variant (good >= 0.75, acceptable >= 0.65) kept selectable
/// because both threshold sets ship in the source material.
TierPreset table9_tier_preset();
/// "results" or "table9"; anything else throws ConfigError.
TierPreset tier_preset_by_name(const std::string& name);

std::vector<std::string> validate_tier_preset(const TierPreset& preset);

SimilarityTier classify_tier(double rho, const TierPreset& preset);

struct TierRow {
  SimilarityTier tier = SimilarityTier::very_poor;
  std::size_t count = 0;
  std::int64_t percent_tenths = 0;

  bool operator==(const TierRow&) const = default;
};

struct TierDistribution {
  std::size_t total = 0;
  std::vector<TierRow> rows;  // fixed order: excellent down to very_poor

  bool operator==(const TierDistribution&) const = default;
};

TierDistribution tier_distribution(const std::vector<double>& rhos, const TierPreset& preset);

/// Supplies the (ground truth, prediction) vector pair for one record.
/// Callers only ask for records that carry both texts.
class PairEmbeddingSource {
 public:
  virtual ~PairEmbeddingSource() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::pair<std::vector<double>, std::vector<double>> vectors_for(
      const InspectionRecord& record) = 0;
};

/// Adapts a text->vector source: embeds the two texts of each record.
class TextEmbeddingAdapter : public PairEmbeddingSource {
 public:
  explicit TextEmbeddingAdapter(EmbeddingSource& source) : source_(source) {}

  std::size_t dimension() const override { return source_.dimension(); }
  std::pair<std::vector<double>, std::vector<double>> vectors_for(
      const InspectionRecord& record) override;

 private:
  EmbeddingSource& source_;
};

/// Precomputed vectors keyed by "<image_id>/gt" and "<image_id>/pred".
/// File format: JSON lines; the first line declares {"dimension": D}, each
/// following line holds {"id": ..., "vector": [...]}.
class FileEmbeddings : public PairEmbeddingSource {
 public:
  FileEmbeddings(std::size_t dimension, std::map<std::string, std::vector<double>> by_id);

  static FileEmbeddings load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t dimension() const override { return dimension_; }
  std::pair<std::vector<double>, std::vector<double>> vectors_for(
      const InspectionRecord& record) override;

  std::size_t size() const { return by_id_.size(); }

 private:
  const std::vector<double>& vector_for_id(const std::string& id) const;

  std::size_t dimension_;
  std::map<std::string, std::vector<double>> by_id_;
};

struct RecordSimilarity {
  std::string image_id;
  double rho = 0.0;

  bool operator==(const RecordSimilarity&) const = default;
};

struct SimilarityReport {
  std::string preset_name;
  std::vector<RecordSimilarity> per_record;  // sorted by image_id
  std::size_t n_valid = 0;
  std::size_t n_skipped = 0;  // records lacking either text
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  TierDistribution tiers;

  bool operator==(const SimilarityReport&) const = default;
};

/// Similarity of every record that has both texts; the rest are counted as
/// skipped. Throws EvaluationError(empty_evaluation) when nothing is left.
/// The report is independent of record order and execution mode.
SimilarityReport evaluate_pairs(const RecordSet& records, PairEmbeddingSource& embeddings,
                                const TierPreset& preset, ExecMode mode = ExecMode::serial);

struct ModelReport {
  std::string model;
  SimilarityReport report;
};

struct ComparisonCell {
  double value = 0.0;
  bool best = false;

  bool operator==(const ComparisonCell&) const = default;
};

/// One model per row, rows ordered by model name. `best` marks the column
/// winner (highest, except lowest spread wins std_dev); ties flag everyone.
struct ComparisonRow {
  std::string model;
  ComparisonCell mean;
  ComparisonCell std_dev;
  ComparisonCell median;
  ComparisonCell min;
  ComparisonCell max;
  std::array<std::int64_t, 5> tier_percent_tenths{};  // excellent..very_poor

  bool operator==(const ComparisonRow&) const = default;
};

std::vector<ComparisonRow> compare_models(const std::vector<ModelReport>& reports);

}  // namespace bridgescore
