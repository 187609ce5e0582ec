#include "bridgescore/pipeline.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "bridgescore/backends.hpp"
#include "bridgescore/corpus.hpp"
#include "bridgescore/csv.hpp"
#include "bridgescore/errors.hpp"
#include "bridgescore/numfmt.hpp"
#include "bridgescore/stats.hpp"
#include "json.hpp"

namespace bridgescore {
namespace {

namespace fs = std::filesystem;

constexpr const char* kNoScoreNote = "No Score due to Low Quality Image";

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

const std::set<std::string>& known_top_keys() {
  static const std::set<std::string> keys = {
      "records",   "rules",  "vocabulary", "guard",     "embeddings",
      "preset",    "out",    "seed",       "mode",      "judge",
      "embedding", "embedding_dimension",  "inference"};
  return keys;
}

BackendConfig parse_backend_yaml(const YAML::Node& node, const std::string& name,
                                 std::vector<std::string>& problems) {
  BackendConfig cfg;
  if (!node.IsMap()) {
    problems.push_back(name + ": expected a map");
    return cfg;
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    try {
      if (key == "kind") {
        const std::string kind = kv.second.as<std::string>();
        if (kind == "mock") {
          cfg.kind = BackendConfig::Kind::mock;
        } else if (kind == "http") {
          cfg.kind = BackendConfig::Kind::http;
        } else {
          problems.push_back(name + ".kind: expected mock or http, got \"" +
                             kind + "\"");
        }
      } else if (key == "endpoint") {
        cfg.endpoint = kv.second.as<std::string>();
      } else if (key == "timeout_s") {
        cfg.timeout_s = kv.second.as<double>();
      } else if (key == "max_retries") {
        cfg.max_retries = kv.second.as<int>();
      } else if (key == "max_in_flight") {
        cfg.max_in_flight = kv.second.as<int>();
      } else {
        problems.push_back(name + ": unknown key \"" + key + "\"");
      }
    } catch (const YAML::Exception&) {
      problems.push_back(name + "." + key + ": unreadable value");
    }
  }
  return cfg;
}

const char* exec_mode_name(ExecMode mode) {
  return mode == ExecMode::serial ? "serial" : "parallel";
}

nlohmann::json backend_json(const BackendConfig& cfg) {
  nlohmann::json j;
  j["kind"] = cfg.kind == BackendConfig::Kind::mock ? "mock" : "http";
  if (cfg.endpoint.has_value()) j["endpoint"] = *cfg.endpoint;
  j["timeout_s"] = cfg.timeout_s;
  j["max_retries"] = cfg.max_retries;
  j["max_in_flight"] = cfg.max_in_flight;
  return j;
}

// Serializes clock access: the contract says calls are thread-safe even when
// the injected callable is not.
class LockedClock {
 public:
  explicit LockedClock(Clock clock) : clock_(std::move(clock)) {}

  double now() {
    std::lock_guard<std::mutex> lock(mu_);
    return clock_();
  }

 private:
  std::mutex mu_;
  Clock clock_;
};

struct WrittenFiles {
  std::vector<std::string> names;
};

void write_text_file(const fs::path& dir, const std::string& name,
                     const std::string& content, WrittenFiles& written) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw PipelineError(PipelineStage::report,
                        "cannot open " + path.string() + " for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw PipelineError(PipelineStage::report, "write failed: " + path.string());
  }
  if (std::find(written.names.begin(), written.names.end(), name) ==
      written.names.end()) {
    written.names.push_back(name);
  }
}

std::string damages_cell(const std::vector<std::string>& damages) {
  std::string joined;
  for (const std::string& d : damages) {
    if (!joined.empty()) joined += "; ";
    joined += d;
  }
  return joined;
}

std::string guard_csv(const std::vector<const InspectionRecord*>& records,
                      const std::vector<GuardOutcome>& outcomes) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"image_id", "verdict", "reason", "stage", "note"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const GuardOutcome& o = outcomes[i];
    w.row({records[i]->image_id, guard_verdict_string(o.verdict),
           guard_reason_string(o.reason), std::to_string(o.stage),
           o.note.value_or("")});
  }
  return out.str();
}

std::string scores_csv(const std::vector<ScoredRow>& rows) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"image_id", "member", "damages", "location", "severity", "extent",
         "base_score", "bonused_score", "priority_level", "priority_label",
         "note"});
  for (const ScoredRow& r : rows) {
    if (!r.scored) {
      w.row({r.image_id, "", "", "", "", "", "", "", "", "", r.note});
      continue;
    }
    const StructuredAttributes& a = r.attributes;
    w.row({r.image_id, a.member.value_or(""), damages_cell(a.damages),
           a.location.value_or(""), a.severity.value_or(""),
           a.extent.value_or(""), format_fixed(r.result.base_score, 4),
           format_fixed(r.result.bonused_score, 4),
           std::to_string(r.result.level),
           priority_label_name(r.result.label), r.note});
  }
  return out.str();
}

std::string similarity_csv(const std::optional<SimilarityReport>& report) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"image_id", "rho", "tier"});
  if (report.has_value()) {
    for (const RecordSimilarity& r : report->per_record) {
      w.row({r.image_id, format_fixed(r.rho, 6),
             similarity_tier_string(classify_tier(
                 r.rho, tier_preset_by_name(report->preset_name)))});
    }
  }
  return out.str();
}

nlohmann::json summary_json_object(const PipelineResult& result) {
  nlohmann::json j;
  j["n_records"] = result.n_records;

  nlohmann::json guard;
  guard["pass"] = result.outcome_table.pass_total;
  guard["fail"] = result.outcome_table.fail_total;
  guard["pass_percent_tenths"] = result.outcome_table.pass_percent_tenths;
  guard["fail_percent_tenths"] = result.outcome_table.fail_percent_tenths;
  nlohmann::json rows = nlohmann::json::array();
  for (const OutcomeRow& row : result.outcome_table.rows) {
    nlohmann::json r;
    r["verdict"] = guard_verdict_string(row.verdict);
    r["reason"] = guard_reason_string(row.reason);
    r["count"] = row.count;
    r["percent_tenths"] = row.percent_tenths;
    rows.push_back(r);
  }
  guard["rows"] = rows;
  j["guard"] = guard;

  nlohmann::json priorities;
  std::array<std::uint64_t, 5> level_counts{};
  std::uint64_t no_score = 0;
  std::set<std::string> distinct_scores;
  for (const ScoredRow& r : result.scores) {
    if (!r.scored) {
      ++no_score;
      continue;
    }
    ++level_counts[static_cast<std::size_t>(r.result.level - 1)];
    distinct_scores.insert(format_fixed(r.result.bonused_score, 12));
  }
  for (int level = 1; level <= 5; ++level) {
    priorities["P" + std::to_string(level)] =
        level_counts[static_cast<std::size_t>(level - 1)];
  }
  priorities["no_score"] = no_score;
  priorities["distinct_bonused_scores"] = distinct_scores.size();
  j["priorities"] = priorities;

  if (result.similarity.has_value()) {
    const SimilarityReport& s = *result.similarity;
    nlohmann::json sim;
    sim["preset"] = s.preset_name;
    sim["n_valid"] = s.n_valid;
    sim["n_skipped"] = s.n_skipped;
    sim["mean"] = s.mean;
    sim["std_dev"] = s.std_dev;
    sim["median"] = s.median;
    sim["min"] = s.min;
    sim["max"] = s.max;
    nlohmann::json tiers = nlohmann::json::array();
    for (const TierRow& t : s.tiers.rows) {
      nlohmann::json row;
      row["tier"] = similarity_tier_string(t.tier);
      row["count"] = t.count;
      row["percent_tenths"] = t.percent_tenths;
      tiers.push_back(row);
    }
    sim["tiers"] = tiers;
    j["similarity"] = sim;
  } else {
    j["similarity"] = nullptr;
    j["notes"] = nlohmann::json::array(
        {"similarity skipped: no record carries both ground-truth and "
         "prediction text"});
  }
  return j;
}

nlohmann::json timing_json_object(const TimingReport& t) {
  nlohmann::json j;
  j["n_rows"] = t.n_rows;
  j["total_s"] = t.total_s;
  j["per_row_mean_s"] = t.per_row_mean_s;
  nlohmann::json stages = nlohmann::json::array();
  for (const StageTiming& s : t.stages) {
    nlohmann::json row;
    row["stage"] = s.stage;
    row["seconds"] = s.seconds;
    stages.push_back(row);
  }
  j["stages"] = stages;
  nlohmann::json rows = nlohmann::json::array();
  for (const RowTiming& r : t.rows) {
    nlohmann::json row;
    row["image_id"] = r.image_id;
    row["seconds"] = r.seconds;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

std::string hash_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string manifest_json(const PipelineConfig& cfg, std::size_t n_records,
                          const WrittenFiles& written, bool complete,
                          const PipelineError* error) {
  nlohmann::json j;
  j["complete"] = complete;
  j["config"] = nlohmann::json::parse(canonical_config_json(cfg));
  j["config_hash"] = hash_hex(fnv1a64_str(canonical_config_json(cfg)));
  if (error != nullptr) {
    nlohmann::json e;
    e["stage"] = pipeline_stage_name(error->stage());
    e["message"] = error->what();
    j["error"] = e;
  }
  j["n_records"] = n_records;
  std::vector<std::string> outputs = written.names;
  std::sort(outputs.begin(), outputs.end());
  j["outputs"] = outputs;
  j["schema_version"] = 1;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

}  // namespace

const char* pipeline_stage_name(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::config: return "config";
    case PipelineStage::load: return "load";
    case PipelineStage::inference: return "inference";
    case PipelineStage::guard: return "guard";
    case PipelineStage::scoring: return "scoring";
    case PipelineStage::evaluation: return "evaluation";
    case PipelineStage::report: return "report";
  }
  return "unknown";
}

PipelineConfig parse_pipeline_config_yaml(const std::string& text,
                                          const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("pipeline config is not valid YAML: ") +
                      e.what());
  }
  if (!root.IsMap()) throw ConfigError("pipeline config must be a YAML map");

  PipelineConfig cfg;
  std::vector<std::string> problems;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (known_top_keys().count(key) == 0) {
      problems.push_back("unknown key \"" + key + "\"");
      continue;
    }
    try {
      if (key == "records") {
        cfg.records_path = resolve_path(base_dir, kv.second.as<std::string>());
      } else if (key == "rules") {
        cfg.rules_path = resolve_path(base_dir, kv.second.as<std::string>());
      } else if (key == "vocabulary") {
        cfg.vocabulary_path =
            resolve_path(base_dir, kv.second.as<std::string>());
      } else if (key == "guard") {
        cfg.guard_config_path =
            resolve_path(base_dir, kv.second.as<std::string>());
      } else if (key == "embeddings") {
        cfg.embeddings_path =
            resolve_path(base_dir, kv.second.as<std::string>());
      } else if (key == "preset") {
        cfg.tier_preset = kv.second.as<std::string>();
      } else if (key == "out") {
        cfg.out_dir = resolve_path(base_dir, kv.second.as<std::string>());
      } else if (key == "seed") {
        cfg.seed = kv.second.as<std::uint64_t>();
      } else if (key == "mode") {
        const std::string mode = kv.second.as<std::string>();
        if (mode == "serial") {
          cfg.mode = ExecMode::serial;
        } else if (mode == "parallel") {
          cfg.mode = ExecMode::parallel;
        } else {
          problems.push_back("mode: expected serial or parallel, got \"" +
                             mode + "\"");
        }
      } else if (key == "judge") {
        cfg.judge = parse_backend_yaml(kv.second, "judge", problems);
      } else if (key == "embedding") {
        cfg.embedding = parse_backend_yaml(kv.second, "embedding", problems);
      } else if (key == "embedding_dimension") {
        cfg.embedding_dimension = kv.second.as<int>();
      } else if (key == "inference") {
        cfg.inference = parse_backend_yaml(kv.second, "inference", problems);
      }
    } catch (const YAML::Exception&) {
      problems.push_back(key + ": unreadable value");
    }
  }
  if (!problems.empty()) {
    std::string joined = "pipeline config invalid:";
    for (const std::string& p : problems) joined += "\n  - " + p;
    throw ConfigError(joined);
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read pipeline config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config_yaml(buf.str(),
                                    fs::path(path).parent_path().string());
}

std::vector<std::string> validate_pipeline_config(const PipelineConfig& cfg) {
  std::vector<std::string> problems;
  const auto need_file = [&problems](const std::string& what,
                                     const std::string& path) {
    if (path.empty()) {
      problems.push_back(what + " path is empty");
    } else if (!fs::exists(path)) {
      problems.push_back(what + " file does not exist: " + path);
    }
  };
  need_file("records", cfg.records_path);
  need_file("rules", cfg.rules_path);
  need_file("vocabulary", cfg.vocabulary_path);
  need_file("guard config", cfg.guard_config_path);
  if (cfg.embeddings_path.has_value())
    need_file("embeddings", *cfg.embeddings_path);
  if (cfg.out_dir.empty()) problems.push_back("output directory is empty");
  try {
    tier_preset_by_name(cfg.tier_preset);
  } catch (const ConfigError& e) {
    problems.push_back(e.what());
  }
  for (const std::string& p : validate_backend_config(cfg.judge))
    problems.push_back("judge backend: " + p);
  for (const std::string& p : validate_backend_config(cfg.embedding))
    problems.push_back("embedding backend: " + p);
  if (cfg.embedding_dimension < 1)
    problems.push_back("embedding_dimension must be at least 1");
  if (cfg.inference.has_value()) {
    for (const std::string& p : validate_backend_config(*cfg.inference))
      problems.push_back("inference backend: " + p);
    if (cfg.inference->kind == BackendConfig::Kind::mock)
      problems.push_back(
          "inference backend must be http; there is no mock description "
          "generator, supply prediction text in the records instead");
  }
  return problems;
}

std::string canonical_config_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["records"] = cfg.records_path;
  j["rules"] = cfg.rules_path;
  j["vocabulary"] = cfg.vocabulary_path;
  j["guard"] = cfg.guard_config_path;
  if (cfg.embeddings_path.has_value()) j["embeddings"] = *cfg.embeddings_path;
  j["preset"] = cfg.tier_preset;
  j["out"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  j["mode"] = exec_mode_name(cfg.mode);
  j["judge"] = backend_json(cfg.judge);
  j["embedding"] = backend_json(cfg.embedding);
  j["embedding_dimension"] = cfg.embedding_dimension;
  if (cfg.inference.has_value()) j["inference"] = backend_json(*cfg.inference);
  return j.dump();
}

PipelineBackends OwnedBackends::view() const {
  PipelineBackends v;
  v.judge = judge.get();
  v.embeddings = embeddings.get();
  v.inference = inference.get();
  return v;
}

OwnedBackends make_backends(const PipelineConfig& cfg,
                            const GuardConfig& guard_cfg) {
  OwnedBackends owned;
  const bool any_http =
      cfg.judge.kind == BackendConfig::Kind::http ||
      cfg.embedding.kind == BackendConfig::Kind::http ||
      (cfg.inference.has_value() &&
       cfg.inference->kind == BackendConfig::Kind::http);
  if (any_http) owned.transport = std::make_unique<DefaultHttpTransport>();

  if (cfg.judge.kind == BackendConfig::Kind::mock) {
    owned.judge = std::make_unique<MockJudge>(guard_cfg);
  } else {
    owned.judge = std::make_unique<HttpJudge>(cfg.judge, *owned.transport);
  }
  if (cfg.embedding.kind == BackendConfig::Kind::mock) {
    owned.embeddings = std::make_unique<MockEmbeddings>(
        static_cast<std::size_t>(cfg.embedding_dimension));
  } else {
    owned.embeddings = std::make_unique<HttpEmbeddings>(
        cfg.embedding, *owned.transport,
        static_cast<std::size_t>(cfg.embedding_dimension));
  }
  if (cfg.inference.has_value()) {
    if (cfg.inference->kind != BackendConfig::Kind::http) {
      throw ConfigError(
          "inference backend must be http; there is no mock description "
          "generator");
    }
    owned.inference =
        std::make_unique<HttpInference>(*cfg.inference, *owned.transport);
  }
  return owned;
}

Clock steady_clock_seconds() {
  return []() {
    const auto now = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double>(now).count();
  };
}

PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const PipelineBackends& backends, Clock clock) {
  const std::vector<std::string> problems = validate_pipeline_config(cfg);
  if (!problems.empty()) {
    std::string joined = "invalid pipeline config:";
    for (const std::string& p : problems) joined += "\n  - " + p;
    throw PipelineError(PipelineStage::config, joined);
  }

  const fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw PipelineError(PipelineStage::config,
                        "cannot create output directory " + cfg.out_dir + ": " +
                            ec.message());
  }

  LockedClock timer(std::move(clock));
  PipelineResult result;
  WrittenFiles written;
  TimingReport& timing = result.timing;
  const double t_start = timer.now();
  double t_prev = t_start;
  const auto mark_stage = [&](const char* name) {
    const double now = timer.now();
    timing.stages.push_back({name, now - t_prev});
    t_prev = now;
  };

  // On failure: flush a manifest naming the failed stage next to whatever
  // outputs made it to disk, then rethrow for the caller's exit code.
  const auto abort_run = [&](const PipelineError& e) -> void {
    try {
      write_text_file(out_dir, "manifest.json",
                      manifest_json(cfg, result.n_records, written, false, &e),
                      written);
    } catch (const PipelineError&) {
      // The manifest itself is unwritable; the original error wins.
    }
    throw e;
  };

  // ---- load ----------------------------------------------------------------
  RecordSet records;
  ScoringRules rules;
  Vocabulary vocab;
  GuardConfig guard_cfg;
  try {
    rules = load_rules(cfg.rules_path);
    vocab = load_vocabulary(cfg.vocabulary_path);
    guard_cfg = load_guard_config(cfg.guard_config_path);
  } catch (const std::exception& e) {
    abort_run(PipelineError(PipelineStage::config, e.what()));
  }
  try {
    const RecordFormat format =
        cfg.records_path.size() >= 6 &&
                cfg.records_path.substr(cfg.records_path.size() - 6) == ".jsonl"
            ? RecordFormat::jsonl
            : RecordFormat::csv;
    LoadResult loaded = load_records(cfg.records_path, format);
    if (!loaded.row_errors.empty()) {
      std::string msg = "records file has malformed rows:";
      for (const RowError& err : loaded.row_errors) {
        msg += "\n  - line " + std::to_string(err.line) + ": " + err.message;
      }
      throw CorpusError(msg);
    }
    if (loaded.set.empty()) throw CorpusError("records file holds no records");
    std::set<std::string> ids;
    for (const InspectionRecord& r : loaded.set.records) {
      if (!ids.insert(r.image_id).second) {
        throw CorpusError("duplicate image_id \"" + r.image_id +
                          "\"; ids must be unique for an auditable run");
      }
    }
    records = std::move(loaded.set);
  } catch (const std::exception& e) {
    abort_run(PipelineError(PipelineStage::load, e.what()));
  }

  // All downstream order comes from here: sort once by image_id so every
  // output is independent of the input row order.
  std::sort(records.records.begin(), records.records.end(),
            [](const InspectionRecord& a, const InspectionRecord& b) {
              return a.image_id < b.image_id;
            });
  result.n_records = records.size();
  mark_stage("load");

  // ---- inference -----------------------------------------------------------
  if (backends.inference != nullptr) {
    try {
      for (InspectionRecord& r : records.records) {
        if (r.prediction_text.has_value()) continue;
        InferenceRequest req;
        req.image_id = r.image_id;
        r.prediction_text = backends.inference->generate(req);
        r.token_count.reset();  // counts describe the text they came with
      }
    } catch (const std::exception& e) {
      abort_run(PipelineError(PipelineStage::inference, e.what()));
    }
  }
  mark_stage("inference");

  // ---- per-record flow: guard, then extract + score for passing rows ------
  const std::size_t n = records.size();
  result.outcomes.assign(n, GuardOutcome{});
  result.scores.assign(n, ScoredRow{});
  timing.rows.assign(n, RowTiming{});
  std::vector<std::exception_ptr> row_errors(n);
  std::vector<int> failed_phase(n, 0);  // 1 = guard, 2 = scoring

  parallel_for(n, cfg.mode, [&](std::size_t i) {
    const InspectionRecord& record = records.records[i];
    RowTiming& row_time = timing.rows[i];
    row_time.image_id = record.image_id;
    const double row_start = timer.now();
    int phase = 1;
    try {
      const GuardOutcome outcome =
          guard_record(record, guard_cfg, backends.judge);
      result.outcomes[i] = outcome;

      ScoredRow& score = result.scores[i];
      score.image_id = record.image_id;
      phase = 2;
      if (outcome.verdict == GuardVerdict::pass) {
        score.scored = true;
        score.attributes =
            extract_attributes(record.prediction_text.value_or(""), vocab);
        score.result = score_record(score.attributes, rules);
      } else {
        score.scored = false;
        score.note = kNoScoreNote;
      }
    } catch (...) {
      row_errors[i] = std::current_exception();
      failed_phase[i] = phase;
    }
    row_time.seconds = timer.now() - row_start;
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (!row_errors[i]) continue;
    try {
      std::rethrow_exception(row_errors[i]);
    } catch (const std::exception& e) {
      const PipelineStage stage = failed_phase[i] == 1 ? PipelineStage::guard
                                                       : PipelineStage::scoring;
      abort_run(PipelineError(
          stage, records.records[i].image_id + ": " + e.what()));
    }
  }

  result.outcome_table = aggregate_outcomes(result.outcomes);
  timing.n_rows = n;
  double row_total = 0.0;
  for (const RowTiming& r : timing.rows) row_total += r.seconds;
  timing.per_row_mean_s = n == 0 ? 0.0 : row_total / static_cast<double>(n);
  mark_stage("rows");

  {
    std::vector<const InspectionRecord*> record_ptrs;
    record_ptrs.reserve(n);
    for (const InspectionRecord& r : records.records)
      record_ptrs.push_back(&r);
    try {
      write_text_file(out_dir, "guard.csv",
                      guard_csv(record_ptrs, result.outcomes), written);
      write_text_file(out_dir, "scores.csv", scores_csv(result.scores),
                      written);
    } catch (const PipelineError& e) {
      abort_run(e);
    }
  }

  // ---- evaluation ----------------------------------------------------------
  try {
    const TierPreset preset = tier_preset_by_name(cfg.tier_preset);
    if (cfg.embeddings_path.has_value()) {
      FileEmbeddings stored = FileEmbeddings::load(*cfg.embeddings_path);
      result.similarity = evaluate_pairs(records, stored, preset, cfg.mode);
    } else if (backends.embeddings != nullptr) {
      TextEmbeddingAdapter adapter(*backends.embeddings);
      result.similarity = evaluate_pairs(records, adapter, preset, cfg.mode);
    }
  } catch (const EvaluationError& e) {
    if (e.kind() == EvaluationError::Kind::empty_evaluation) {
      result.similarity.reset();  // noted in the summary instead
    } else {
      abort_run(PipelineError(PipelineStage::evaluation, e.what()));
    }
  } catch (const std::exception& e) {
    abort_run(PipelineError(PipelineStage::evaluation, e.what()));
  }
  mark_stage("evaluation");

  // ---- reports -------------------------------------------------------------
  try {
    write_text_file(out_dir, "similarity.csv", similarity_csv(result.similarity),
                    written);
    write_text_file(out_dir, "summary.json",
                    summary_json_object(result).dump(2) + "\n", written);
    write_text_file(out_dir, "manifest.json",
                    manifest_json(cfg, result.n_records, written, true, nullptr),
                    written);
  } catch (const PipelineError& e) {
    abort_run(e);
  }
  mark_stage("report");
  timing.total_s = t_prev - t_start;

  // Wall-clock numbers land in their own file so the rest of the bundle stays
  // byte-identical across runs.
  try {
    write_text_file(out_dir, "timing.json",
                    timing_json_object(timing).dump(2) + "\n", written);
  } catch (const PipelineError& e) {
    abort_run(e);
  }

  result.output_files = written.names;
  return result;
}

}  // namespace bridgescore
