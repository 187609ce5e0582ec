#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgescore/backend_iface.hpp"
#include "bridgescore/backends.hpp"
#include "bridgescore/evaluation.hpp"
#include "bridgescore/extract.hpp"
#include "bridgescore/guard.hpp"
#include "bridgescore/parallel.hpp"
#include "bridgescore/scoring.hpp"

namespace bridgescore {

// End-to-end run: load records, optionally generate missing descriptions,
// guard every record, extract + score the passing ones, evaluate similarity,
// and write the report bundle. Every byte-deterministic output is sorted by
// image_id and written once, so re-runs and record-order permutations produce
// identical files.

/// Stage whose failure aborted a run. The numeric value doubles as the
/// process exit code (0 = success, 1 = unexpected internal error).
enum class PipelineStage {
  config = 2,      // pipeline/rules/vocabulary/guard config invalid or missing
  load = 3,        // records unreadable, malformed rows, duplicate ids, empty
  inference = 4,   // description backend failed
  guard = 5,       // judge backend or verdict protocol failure
  scoring = 6,     // extraction or scoring failure
  evaluation = 7,  // embedding backend or vector store failure
  report = 8,      // output files could not be written
};

const char* pipeline_stage_name(PipelineStage stage);

class PipelineError : public std::runtime_error {
 public:
  PipelineError(PipelineStage stage, const std::string& message)
      : std::runtime_error(std::string(pipeline_stage_name(stage)) + ": " +
                           message),
        stage_(stage) {}

  PipelineStage stage() const { return stage_; }
  int exit_code() const { return static_cast<int>(stage_); }

 private:
  PipelineStage stage_;
};

struct PipelineConfig {
  std::string records_path;
  std::string rules_path;
  std::string vocabulary_path;
  std::string guard_config_path;
  // Similarity vectors from a stored file instead of an embedding backend.
  std::optional<std::string> embeddings_path;
  std::string tier_preset = "results";
  std::string out_dir;
  std::uint64_t seed = 0;
  ExecMode mode = ExecMode::parallel;
  BackendConfig judge;      // kind defaults to mock
  BackendConfig embedding;  // kind defaults to mock
  int embedding_dimension = 768;
  std::optional<BackendConfig> inference;  // http only; fills missing texts

  bool operator==(const PipelineConfig&) const = default;
};

/// Parse a pipeline config from YAML. Relative paths are resolved against
/// `base_dir` (pass the config file's directory so a config travels with its
/// data). Structural problems throw ConfigError with every violation listed.
PipelineConfig parse_pipeline_config_yaml(const std::string& text,
                                          const std::string& base_dir);
PipelineConfig load_pipeline_config(const std::string& path);

/// Existence and consistency checks for a resolved config; empty when valid.
std::vector<std::string> validate_pipeline_config(const PipelineConfig& cfg);

/// Canonical JSON rendering of a resolved config. Hashed into the manifest so
/// a bundle can be matched to the exact configuration that produced it.
std::string canonical_config_json(const PipelineConfig& cfg);

/// Non-owning backend views handed to run_pipeline. `judge` may be null for
/// rule-only guarding. `embeddings` may be null when the config names an
/// embeddings file (or similarity is skipped). `inference` fills in missing
/// prediction texts when present.
struct PipelineBackends {
  JudgeBackend* judge = nullptr;
  EmbeddingSource* embeddings = nullptr;
  InferenceBackend* inference = nullptr;
};

/// Owning bundle constructed from a config: mock backends in-process, http
/// backends over one shared transport.
struct OwnedBackends {
  std::unique_ptr<JudgeBackend> judge;
  std::unique_ptr<EmbeddingSource> embeddings;
  std::unique_ptr<InferenceBackend> inference;
  std::unique_ptr<HttpTransport> transport;

  PipelineBackends view() const;
};

OwnedBackends make_backends(const PipelineConfig& cfg, const GuardConfig& guard_cfg);

/// Monotonic seconds. Injectable so tests can verify the timing arithmetic
/// exactly; calls are serialized, the default reads the steady clock.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

struct RowTiming {
  std::string image_id;
  double seconds = 0.0;

  bool operator==(const RowTiming&) const = default;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;

  bool operator==(const StageTiming&) const = default;
};

struct TimingReport {
  std::size_t n_rows = 0;
  double total_s = 0.0;
  double per_row_mean_s = 0.0;         // mean of rows[].seconds
  std::vector<StageTiming> stages;     // fixed order, durations sum to total
  std::vector<RowTiming> rows;         // sorted by image_id

  bool operator==(const TimingReport&) const = default;
};

/// One scored (or explicitly unscored) record.
struct ScoredRow {
  std::string image_id;
  bool scored = false;
  StructuredAttributes attributes;  // meaningful only when scored
  PriorityResult result;            // meaningful only when scored
  std::string note;                 // reason text when not scored

  bool operator==(const ScoredRow&) const = default;
};

struct PipelineResult {
  std::size_t n_records = 0;
  // All aligned with the records sorted by image_id.
  std::vector<GuardOutcome> outcomes;
  OutcomeTable outcome_table;
  std::vector<ScoredRow> scores;
  std::optional<SimilarityReport> similarity;  // absent when no pair had texts
  TimingReport timing;
  std::vector<std::string> output_files;  // names written into out_dir
};

/// Executes the full flow and writes the bundle into cfg.out_dir:
/// guard.csv, scores.csv, similarity.csv, summary.json, manifest.json
/// (all byte-deterministic) plus timing.json (wall-clock, excluded from
/// determinism guarantees). A stage failure throws PipelineError after
/// flushing the files already produced and a manifest with complete=false
/// naming the failed stage.
PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const PipelineBackends& backends,
                            Clock clock = steady_clock_seconds());

}  // namespace bridgescore
