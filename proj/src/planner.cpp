#include "bridgescore/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bridgescore/csv.hpp"
#include "bridgescore/numfmt.hpp"
#include "json.hpp"

namespace bridgescore {
namespace {

[[noreturn]] void bad_argument(const std::string& message) {
  throw PlannerError(PlannerError::Kind::bad_argument, message);
}

double parse_double_cell(const std::string& cell, std::size_t line,
                         const std::string& column) {
  try {
    std::size_t consumed = 0;
    double value = std::stod(cell, &consumed);
    if (consumed != cell.size()) throw std::invalid_argument(cell);
    return value;
  } catch (const std::exception&) {
    bad_argument("line " + std::to_string(line) + ": " + column +
                 " must be a number, got \"" + cell + "\"");
  }
}

int parse_int_cell(const std::string& cell, std::size_t line,
                   const std::string& column) {
  try {
    std::size_t consumed = 0;
    int value = std::stoi(cell, &consumed);
    if (consumed != cell.size()) throw std::invalid_argument(cell);
    return value;
  } catch (const std::exception&) {
    bad_argument("line " + std::to_string(line) + ": " + column +
                 " must be an integer, got \"" + cell + "\"");
  }
}

bool parse_bool_cell(const std::string& cell, std::size_t line) {
  if (cell == "true" || cell == "1") return true;
  if (cell == "false" || cell == "0") return false;
  bad_argument("line " + std::to_string(line) +
               ": feasible must be true/false/1/0, got \"" + cell + "\"");
}

}  // namespace

std::vector<std::string> validate_measurements(
    const std::vector<BatchMeasurement>& measurements) {
  std::vector<std::string> problems;
  std::set<int> seen;
  for (const BatchMeasurement& m : measurements) {
    const std::string tag = "batch " + std::to_string(m.batch_size) + ": ";
    if (m.batch_size < 1)
      problems.push_back(tag + "batch_size must be at least 1");
    if (m.feasible && !(m.per_image_latency > 0.0))
      problems.push_back(tag + "per_image_latency must be positive");
    if (m.feasible &&
        (m.memory_utilization < 0.0 || m.memory_utilization > 1.05))
      problems.push_back(tag + "memory_utilization out of range [0, 1.05]");
    if (!seen.insert(m.batch_size).second)
      problems.push_back(tag + "duplicate batch_size");
  }
  return problems;
}

std::vector<BatchMeasurement> parse_measurements_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) bad_argument("empty measurement file");
  const std::vector<std::string> expected = {
      "batch_size", "per_image_latency", "memory_utilization", "feasible"};
  if (row != expected)
    bad_argument(
        "header must be batch_size,per_image_latency,memory_utilization,"
        "feasible");

  std::vector<BatchMeasurement> out;
  while (reader.next(row)) {
    const std::size_t line = reader.row_line();
    if (row.size() != 4)
      bad_argument("line " + std::to_string(line) + ": expected 4 fields, got " +
                   std::to_string(row.size()));
    BatchMeasurement m;
    m.batch_size = parse_int_cell(row[0], line, "batch_size");
    m.per_image_latency = parse_double_cell(row[1], line, "per_image_latency");
    m.memory_utilization =
        parse_double_cell(row[2], line, "memory_utilization");
    m.feasible = parse_bool_cell(row[3], line);
    out.push_back(m);
  }
  return out;
}

std::vector<BatchMeasurement> load_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad_argument("cannot open measurement file: " + path);
  return parse_measurements_csv(in);
}

double estimate_total(std::size_t n_images, int batch_size, double t_batch,
                      double t_compile) {
  if (n_images < 1) bad_argument("n_images must be at least 1");
  if (batch_size < 1) bad_argument("batch_size must be at least 1");
  if (t_batch < 0.0) bad_argument("t_batch must be non-negative");
  if (t_compile < 0.0) bad_argument("t_compile must be non-negative");
  const std::size_t batches =
      (n_images + static_cast<std::size_t>(batch_size) - 1) /
      static_cast<std::size_t>(batch_size);
  return t_compile + static_cast<double>(batches) * t_batch;
}

BatchMeasurement select_batch_size(
    const std::vector<BatchMeasurement>& measurements, double mem_cap) {
  const BatchMeasurement* best = nullptr;
  for (const BatchMeasurement& m : measurements) {
    if (!m.feasible || m.memory_utilization > mem_cap) continue;
    if (best == nullptr || m.per_image_latency < best->per_image_latency ||
        (m.per_image_latency == best->per_image_latency &&
         m.batch_size < best->batch_size)) {
      best = &m;
    }
  }
  if (best == nullptr)
    throw PlannerError(
        PlannerError::Kind::no_feasible_batch,
        "no measurement is feasible under memory cap " + format_fixed(mem_cap, 2));
  return *best;
}

double speedup_percent(double baseline_per_image, double optimized_per_image) {
  if (!(baseline_per_image > 0.0)) bad_argument("baseline must be positive");
  if (optimized_per_image < 0.0) bad_argument("optimized must be non-negative");
  const double raw =
      100.0 * (baseline_per_image - optimized_per_image) / baseline_per_image;
  return round_half_even(raw, 1);
}

std::int64_t recommend_token_budget(const TokenStats& stats,
                                    std::int64_t granularity, double k) {
  if (granularity < 1) bad_argument("granularity must be at least 1");
  if (k < 0.0) bad_argument("k must be non-negative");
  if (stats.mean < 0.0 || stats.std_dev < 0.0)
    bad_argument("token statistics must be non-negative");
  const double target = stats.mean + k * stats.std_dev;
  const auto needed =
      static_cast<std::int64_t>(std::ceil(target / static_cast<double>(granularity)));
  return needed * granularity;
}

BatchPlan build_plan(const std::vector<BatchMeasurement>& measurements,
                     std::size_t n_images, const PlanOptions& options,
                     const std::optional<TokenStats>& stats) {
  const std::vector<std::string> problems = validate_measurements(measurements);
  if (!problems.empty()) {
    std::string joined = "invalid measurements:";
    for (const std::string& p : problems) joined += "\n  - " + p;
    bad_argument(joined);
  }

  BatchPlan plan;
  const BatchMeasurement chosen = select_batch_size(measurements, options.mem_cap);
  plan.batch_size = chosen.batch_size;
  plan.per_image_latency = chosen.per_image_latency;
  plan.batch_latency =
      static_cast<double>(chosen.batch_size) * chosen.per_image_latency;
  plan.compile_overhead = options.t_compile;
  plan.n_images = n_images;
  plan.estimated_total = estimate_total(n_images, chosen.batch_size,
                                        plan.batch_latency, options.t_compile);

  const auto baseline =
      std::find_if(measurements.begin(), measurements.end(),
                   [](const BatchMeasurement& m) {
                     return m.batch_size == 1 && m.feasible;
                   });
  if (baseline != measurements.end()) {
    plan.baseline_per_image = baseline->per_image_latency;
    plan.speedup_vs_baseline =
        speedup_percent(baseline->per_image_latency, chosen.per_image_latency);
  } else {
    plan.notes.push_back(
        "no batch-size-1 measurement provided; speedup versus baseline "
        "not computed");
  }

  if (stats.has_value()) {
    plan.token_budget =
        recommend_token_budget(*stats, options.granularity, options.k);
    plan.notes.push_back(
        "token_budget rounds mean + " + format_fixed(options.k, 1) +
        "*std up to a multiple of " + std::to_string(options.granularity) +
        "; it is advisory, and a hand-picked smaller budget can be "
        "acceptable when truncating outlier descriptions is tolerable");
  }

  return plan;
}

std::string serialize_plan_json(const BatchPlan& plan) {
  nlohmann::json j;
  j["batch_size"] = plan.batch_size;
  j["per_image_latency"] = plan.per_image_latency;
  j["batch_latency"] = plan.batch_latency;
  j["compile_overhead"] = plan.compile_overhead;
  j["n_images"] = plan.n_images;
  j["estimated_total"] = plan.estimated_total;
  if (plan.baseline_per_image.has_value())
    j["baseline_per_image"] = *plan.baseline_per_image;
  if (plan.speedup_vs_baseline.has_value())
    j["speedup_vs_baseline"] = *plan.speedup_vs_baseline;
  if (plan.token_budget.has_value()) j["token_budget"] = *plan.token_budget;
  j["notes"] = plan.notes;
  return j.dump(2) + "\n";
}

}  // namespace bridgescore
