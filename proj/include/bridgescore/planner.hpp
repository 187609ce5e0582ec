#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgescore/corpus.hpp"

namespace bridgescore {

// Batch planning: pick an inference batch size from throughput measurements,
// project wall-clock time for a full corpus run, and suggest a generation
// token budget from corpus token statistics.

class PlannerError : public std::runtime_error {
 public:
  enum class Kind {
    no_feasible_batch,  // no measurement satisfies feasibility + memory cap
    bad_argument,       // nonsensical input (zero batch, negative time, ...)
  };

  PlannerError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// One benchmarked batch configuration. `feasible` is false when the run
/// failed outright (out of memory, crash); latency/utilization of infeasible
/// rows are not trusted.
struct BatchMeasurement {
  int batch_size = 1;
  double per_image_latency = 0.0;   // seconds per image at this batch size
  double memory_utilization = 0.0;  // fraction of device memory used
  bool feasible = true;

  bool operator==(const BatchMeasurement&) const = default;
};

/// Structural checks: positive batch size, positive latency and utilization
/// in [0, 1.05] for feasible rows, no duplicate batch sizes. Returns one
/// message per violation; empty means valid.
std::vector<std::string> validate_measurements(
    const std::vector<BatchMeasurement>& measurements);

/// Reads measurements from CSV with header
/// `batch_size,per_image_latency,memory_utilization,feasible`.
/// `feasible` accepts true/false/1/0. Throws PlannerError (bad_argument) on
/// malformed content, CsvParseError on broken CSV framing.
std::vector<BatchMeasurement> parse_measurements_csv(std::istream& in);
std::vector<BatchMeasurement> load_measurements(const std::string& path);

/// Wall-clock projection for a full run: t_compile + ceil(n / batch) * t_batch.
/// The final partial batch costs as much as a full one.
double estimate_total(std::size_t n_images, int batch_size, double t_batch,
                      double t_compile);

/// Picks the measurement with the lowest per-image latency among rows that are
/// feasible and fit under `mem_cap`; ties go to the smaller batch size.
/// Throws PlannerError (no_feasible_batch) when no row qualifies.
BatchMeasurement select_batch_size(
    const std::vector<BatchMeasurement>& measurements, double mem_cap = 0.80);

/// Latency improvement in percent: 100 * (baseline - optimized) / baseline,
/// rounded to one decimal (half-even). Requires baseline > 0.
double speedup_percent(double baseline_per_image, double optimized_per_image);

/// Smallest multiple of `granularity` at or above mean + k * std_dev.
/// Advisory: generation rarely needs the full tail, so a hand-picked smaller
/// budget can be acceptable when truncating outliers is tolerable.
std::int64_t recommend_token_budget(const TokenStats& stats,
                                    std::int64_t granularity = 128,
                                    double k = 1.0);

struct PlanOptions {
  double mem_cap = 0.80;
  // Compile/warm-up overhead charged once per run. Observed warm-ups cluster
  // at 60-80 s; the midpoint is the default.
  double t_compile = 70.0;
  std::int64_t granularity = 128;
  double k = 1.0;

  bool operator==(const PlanOptions&) const = default;
};

struct BatchPlan {
  int batch_size = 1;
  double per_image_latency = 0.0;  // seconds, at the chosen batch size
  double batch_latency = 0.0;      // batch_size * per_image_latency
  double compile_overhead = 0.0;   // seconds
  std::size_t n_images = 0;
  double estimated_total = 0.0;  // seconds

  // Versus the batch-size-1 measurement, when one was provided.
  std::optional<double> baseline_per_image;
  std::optional<double> speedup_vs_baseline;  // percent, one decimal

  // Present when token statistics were supplied.
  std::optional<std::int64_t> token_budget;

  std::vector<std::string> notes;

  bool operator==(const BatchPlan&) const = default;
};

/// Assembles the full plan: validates measurements, selects a batch size,
/// projects total runtime for `n_images`, computes speedup against the
/// batch-size-1 row when present, and recommends a token budget when `stats`
/// is given.
BatchPlan build_plan(const std::vector<BatchMeasurement>& measurements,
                     std::size_t n_images, const PlanOptions& options = {},
                     const std::optional<TokenStats>& stats = std::nullopt);

/// Deterministic JSON rendering of a plan (keys sorted, optional fields
/// omitted when absent). Same plan always yields the same bytes.
std::string serialize_plan_json(const BatchPlan& plan);

}  // namespace bridgescore
