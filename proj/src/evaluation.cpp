#include "bridgescore/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bridgescore/errors.hpp"
#include "bridgescore/numfmt.hpp"

namespace bridgescore {

double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw EvaluationError(EvaluationError::Kind::dimension_mismatch,
                          "cosine over mismatched dimensions " + std::to_string(u.size()) +
                              " and " + std::to_string(v.size()));
  double dot = 0.0, norm_u = 0.0, norm_v = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    norm_u += u[i] * u[i];
    norm_v += v[i] * v[i];
  }
  if (norm_u == 0.0 || norm_v == 0.0)
    throw EvaluationError(EvaluationError::Kind::zero_vector,
                          "cosine is undefined for a zero vector");
  const double rho = dot / (std::sqrt(norm_u) * std::sqrt(norm_v));
  return std::clamp(rho, -1.0, 1.0);
}

const char* similarity_tier_string(SimilarityTier tier) {
  switch (tier) {
    case SimilarityTier::excellent: return "Excellent";
    case SimilarityTier::good: return "Good";
    case SimilarityTier::acceptable: return "Acceptable";
    case SimilarityTier::poor: return "Poor";
    case SimilarityTier::very_poor: return "Very Poor";
  }
  return "Very Poor";
}

TierPreset results_tier_preset() { return {"results", 0.85, 0.70, 0.60, 0.50}; }

TierPreset table9_tier_preset() { return {"table9", 0.85, 0.75, 0.65, 0.50}; }

TierPreset tier_preset_by_name(const std::string& name) {
  if (name == "results") return results_tier_preset();
  if (name == "table9") return table9_tier_preset();
  throw ConfigError("unknown tier preset '" + name + "' (expected 'results' or 'table9')");
}

std::vector<std::string> validate_tier_preset(const TierPreset& preset) {
  std::vector<std::string> problems;
  const std::array<double, 4> bounds = {preset.excellent_min, preset.good_min,
                                        preset.acceptable_min, preset.poor_min};
  bool shape_ok = true;
  for (double b : bounds)
    if (!(b > 0.0 && b < 1.0)) shape_ok = false;
  for (std::size_t i = 1; i < bounds.size(); ++i)
    if (!(bounds[i - 1] > bounds[i])) shape_ok = false;
  if (!shape_ok)
    problems.push_back("tier bounds must be 4 strictly descending thresholds in (0,1)");
  if (preset.name.empty()) problems.push_back("tier preset needs a name");
  return problems;
}

SimilarityTier classify_tier(double rho, const TierPreset& preset) {
  if (rho >= preset.excellent_min) return SimilarityTier::excellent;
  if (rho >= preset.good_min) return SimilarityTier::good;
  if (rho >= preset.acceptable_min) return SimilarityTier::acceptable;
  if (rho >= preset.poor_min) return SimilarityTier::poor;
  return SimilarityTier::very_poor;
}

TierDistribution tier_distribution(const std::vector<double>& rhos, const TierPreset& preset) {
  std::array<std::size_t, 5> counts{};
  for (double rho : rhos) ++counts[static_cast<std::size_t>(classify_tier(rho, preset))];

  TierDistribution dist;
  dist.total = rhos.size();
  for (int t = static_cast<int>(SimilarityTier::excellent);
       t >= static_cast<int>(SimilarityTier::very_poor); --t) {
    TierRow row;
    row.tier = static_cast<SimilarityTier>(t);
    row.count = counts[static_cast<std::size_t>(t)];
    if (dist.total > 0) row.percent_tenths = percent_tenths(row.count, dist.total);
    dist.rows.push_back(row);
  }
  return dist;
}

std::pair<std::vector<double>, std::vector<double>> TextEmbeddingAdapter::vectors_for(
    const InspectionRecord& record) {
  if (!record.ground_truth_text || !record.prediction_text)
    throw EvaluationError(EvaluationError::Kind::missing_vector,
                          "record " + record.image_id + " lacks a text to embed");
  auto vectors = source_.embed({*record.ground_truth_text, *record.prediction_text});
  if (vectors.size() != 2)
    throw EvaluationError(EvaluationError::Kind::missing_vector,
                          "embedding source returned " + std::to_string(vectors.size()) +
                              " vectors for record " + record.image_id);
  return {std::move(vectors[0]), std::move(vectors[1])};
}

FileEmbeddings::FileEmbeddings(std::size_t dimension,
                               std::map<std::string, std::vector<double>> by_id)
    : dimension_(dimension), by_id_(std::move(by_id)) {
  for (const auto& [id, vector] : by_id_)
    if (vector.size() != dimension_)
      throw EvaluationError(EvaluationError::Kind::dimension_mismatch,
                            "vector '" + id + "' has dimension " +
                                std::to_string(vector.size()) + ", expected " +
                                std::to_string(dimension_));
}

FileEmbeddings FileEmbeddings::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);

  std::string line;
  std::size_t line_no = 0;
  std::size_t dimension = 0;
  bool have_header = false;
  std::map<std::string, std::vector<double>> by_id;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
      throw std::runtime_error("embedding file " + path + " line " + std::to_string(line_no) +
                               " is not a JSON object");
    if (!have_header) {
      if (!parsed.contains("dimension") || !parsed["dimension"].is_number_unsigned() ||
          parsed["dimension"].get<std::size_t>() == 0)
        throw std::runtime_error("embedding file " + path +
                                 " must start with a {\"dimension\": D} header line");
      dimension = parsed["dimension"].get<std::size_t>();
      have_header = true;
      continue;
    }
    if (!parsed.contains("id") || !parsed["id"].is_string() || !parsed.contains("vector") ||
        !parsed["vector"].is_array())
      throw std::runtime_error("embedding file " + path + " line " + std::to_string(line_no) +
                               " needs string 'id' and array 'vector'");
    const std::string id = parsed["id"].get<std::string>();
    if (by_id.count(id))
      throw std::runtime_error("embedding file " + path + " repeats id '" + id + "'");
    const auto& row = parsed["vector"];
    if (row.size() != dimension)
      throw EvaluationError(EvaluationError::Kind::dimension_mismatch,
                            "vector '" + id + "' has dimension " + std::to_string(row.size()) +
                                ", expected " + std::to_string(dimension));
    std::vector<double> v;
    v.reserve(dimension);
    for (const auto& component : row) {
      if (!component.is_number())
        throw std::runtime_error("embedding file " + path + " vector '" + id +
                                 "' has a non-numeric component");
      v.push_back(component.get<double>());
    }
    by_id.emplace(id, std::move(v));
  }
  if (!have_header)
    throw std::runtime_error("embedding file " + path +
                             " must start with a {\"dimension\": D} header line");
  return FileEmbeddings(dimension, std::move(by_id));
}

void FileEmbeddings::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  out << nlohmann::json{{"dimension", dimension_}}.dump() << '\n';
  for (const auto& [id, vector] : by_id_)
    out << nlohmann::json{{"id", id}, {"vector", vector}}.dump() << '\n';
}

const std::vector<double>& FileEmbeddings::vector_for_id(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end())
    throw EvaluationError(EvaluationError::Kind::missing_vector,
                          "no vector stored for id '" + id + "'");
  return it->second;
}

std::pair<std::vector<double>, std::vector<double>> FileEmbeddings::vectors_for(
    const InspectionRecord& record) {
  return {vector_for_id(record.image_id + "/gt"), vector_for_id(record.image_id + "/pred")};
}

SimilarityReport evaluate_pairs(const RecordSet& records, PairEmbeddingSource& embeddings,
                                const TierPreset& preset, ExecMode mode) {
  std::vector<std::size_t> valid;
  valid.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const InspectionRecord& r = records.records[i];
    if (r.ground_truth_text && r.prediction_text) valid.push_back(i);
  }

  SimilarityReport report;
  report.preset_name = preset.name;
  report.n_valid = valid.size();
  report.n_skipped = records.size() - valid.size();
  if (valid.empty())
    throw EvaluationError(EvaluationError::Kind::empty_evaluation,
                          "no record carries both a ground truth and a prediction text");

  report.per_record.resize(valid.size());
  std::vector<std::exception_ptr> errors(valid.size());
  parallel_for(valid.size(), mode, [&](std::size_t slot) {
    try {
      const InspectionRecord& r = records.records[valid[slot]];
      auto [gt, pred] = embeddings.vectors_for(r);
      report.per_record[slot] = {r.image_id, cosine_similarity(gt, pred)};
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  });
  for (const auto& error : errors)
    if (error) std::rethrow_exception(error);

  std::sort(report.per_record.begin(), report.per_record.end(),
            [](const RecordSimilarity& a, const RecordSimilarity& b) {
              return a.image_id < b.image_id;
            });

  std::vector<double> values;
  values.reserve(report.per_record.size());
  for (const auto& entry : report.per_record) values.push_back(entry.rho);

  double sum = 0.0;
  for (double v : values) sum += v;
  report.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - report.mean) * (v - report.mean);
  report.std_dev = std::sqrt(sq / static_cast<double>(values.size()));

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  report.median = (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  report.min = sorted.front();
  report.max = sorted.back();
  report.tiers = tier_distribution(values, preset);
  return report;
}

std::vector<ComparisonRow> compare_models(const std::vector<ModelReport>& reports) {
  std::vector<ComparisonRow> rows;
  rows.reserve(reports.size());
  for (const auto& entry : reports) {
    ComparisonRow row;
    row.model = entry.model;
    row.mean.value = entry.report.mean;
    row.std_dev.value = entry.report.std_dev;
    row.median.value = entry.report.median;
    row.min.value = entry.report.min;
    row.max.value = entry.report.max;
    for (std::size_t i = 0; i < row.tier_percent_tenths.size() &&
                            i < entry.report.tiers.rows.size();
         ++i)
      row.tier_percent_tenths[i] = entry.report.tiers.rows[i].percent_tenths;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) { return a.model < b.model; });

  if (rows.empty()) return rows;
  auto flag_best = [&](ComparisonCell ComparisonRow::*cell, bool lowest_wins) {
    double best = (rows.front().*cell).value;
    for (const auto& row : rows) {
      const double v = (row.*cell).value;
      if (lowest_wins ? v < best : v > best) best = v;
    }
    for (auto& row : rows)
      if ((row.*cell).value == best) (row.*cell).best = true;
  };
  flag_best(&ComparisonRow::mean, false);
  flag_best(&ComparisonRow::median, false);
  flag_best(&ComparisonRow::min, false);
  flag_best(&ComparisonRow::max, false);
  flag_best(&ComparisonRow::std_dev, true);
  return rows;
}

}  // namespace bridgescore
