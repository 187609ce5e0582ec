// bridgescore: deterministic scoring pipeline for bridge-inspection damage
// descriptions. Every subcommand is a thin wrapper over one library
// operation; all heavy lifting and all tests live in the library.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bridgescore/backends.hpp"
#include "bridgescore/corpus.hpp"
#include "bridgescore/csv.hpp"
#include "bridgescore/errors.hpp"
#include "bridgescore/evaluation.hpp"
#include "bridgescore/extract.hpp"
#include "bridgescore/guard.hpp"
#include "bridgescore/numfmt.hpp"
#include "bridgescore/pipeline.hpp"
#include "bridgescore/planner.hpp"
#include "bridgescore/scoring.hpp"
#include "json.hpp"

namespace {

using namespace bridgescore;

// Exit codes, shared across subcommands (run-pipeline maps its stages to the
// same numbers): 0 success, 1 unexpected error, 2 configuration, 3 input
// data, 4 backend transport, 5 judge protocol, 6 planning, 7 evaluation,
// 8 output writing.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitBackend = 4;
constexpr int kExitJudge = 5;
constexpr int kExitPlan = 6;
constexpr int kExitEvaluation = 7;

RecordFormat format_for(const std::string& path) {
  const std::string suffix = ".jsonl";
  return path.size() >= suffix.size() &&
                 path.compare(path.size() - suffix.size(), suffix.size(),
                              suffix) == 0
             ? RecordFormat::jsonl
             : RecordFormat::csv;
}

RecordSet load_records_lenient(const std::string& path) {
  LoadResult loaded = load_records(path, format_for(path));
  for (const RowError& err : loaded.row_errors) {
    std::cerr << "warning: " << path << " line " << err.line << ": "
              << err.message << "\n";
  }
  if (loaded.set.empty()) throw CorpusError(path + " holds no usable records");
  return std::move(loaded.set);
}

void write_or_print(const std::optional<std::string>& out_path,
                    const std::string& content) {
  if (!out_path.has_value()) {
    std::cout << content;
    return;
  }
  std::ofstream out(*out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + *out_path);
  out << content;
}

std::string damages_cell(const std::vector<std::string>& damages) {
  std::string joined;
  for (const std::string& d : damages) {
    if (!joined.empty()) joined += "; ";
    joined += d;
  }
  return joined;
}

const std::string& source_text(const InspectionRecord& r) {
  static const std::string empty;
  if (r.prediction_text.has_value()) return *r.prediction_text;
  if (r.ground_truth_text.has_value()) return *r.ground_truth_text;
  return empty;
}

// Token statistics need a count source per record; rows with neither a
// token_count nor a prediction text (e.g. unreadable images) sit the
// calibration out.
RecordSet countable_records(const RecordSet& records) {
  RecordSet usable;
  usable.provenance = records.provenance;
  for (const InspectionRecord& r : records.records) {
    if (r.token_count.has_value() || r.prediction_text.has_value())
      usable.records.push_back(r);
  }
  if (usable.size() < records.size()) {
    std::cerr << "note: " << (records.size() - usable.size())
              << " record(s) without prediction text or token_count excluded "
                 "from token statistics\n";
  }
  if (usable.empty())
    throw CorpusError("no record carries prediction text or a token_count");
  return usable;
}

void print_outcome_table(const OutcomeTable& table) {
  std::cout << "records: " << table.total << "  pass: " << table.pass_total
            << " (" << format_percent(table.pass_total, table.total)
            << "%)  fail: " << table.fail_total << " ("
            << format_percent(table.fail_total, table.total) << "%)\n";
  for (const OutcomeRow& row : table.rows) {
    std::cout << "  " << guard_verdict_string(row.verdict) << "  "
              << guard_reason_string(row.reason) << ": " << row.count << " ("
              << format_percent(row.count, table.total) << "%)\n";
  }
}

// ---- calibrate -------------------------------------------------------------

int cmd_calibrate(const std::string& records_path, double rank_low,
                  double rank_high, const std::optional<std::string>& out) {
  const RecordSet records = load_records_lenient(records_path);
  const TokenStats stats =
      token_stats(records, TokenizerConfig{}, rank_low, rank_high);
  nlohmann::json j;
  j["n"] = stats.n;
  j["mean"] = stats.mean;
  j["std_dev"] = stats.std_dev;
  j["median"] = stats.median;
  j["theta_low"] = stats.p_low;
  j["theta_high"] = stats.p_high;
  j["percentile_ranks"] = {stats.percentile_ranks.first,
                           stats.percentile_ranks.second};
  write_or_print(out, j.dump(2) + "\n");
  return 0;
}

// ---- filter-corpus ---------------------------------------------------------

int cmd_filter(const std::string& records_path, const FilterConfig& cfg,
               const std::string& out,
               const std::optional<std::string>& rejected_path) {
  const RecordSet records = load_records_lenient(records_path);
  validate_filter_config(cfg);
  const FilterResult result = filter_quality(records, cfg);
  save_records_csv(result.accepted, out);
  if (rejected_path.has_value()) {
    std::ofstream log(*rejected_path, std::ios::binary);
    if (!log)
      throw std::runtime_error("cannot open for writing: " + *rejected_path);
    write_rejection_log(result.rejected, log);
  }
  std::cout << "accepted " << result.accepted.size() << " of "
            << records.size() << " records; rejected "
            << result.rejected.size() << "\n";
  return 0;
}

// ---- sample ----------------------------------------------------------------

int cmd_sample(const std::string& records_path,
               const std::string& vocabulary_path, std::size_t n,
               std::uint64_t seed, const std::string& out) {
  const RecordSet records = load_records_lenient(records_path);
  const Vocabulary vocab = load_vocabulary(vocabulary_path);
  const StrataFn strata = [&vocab](const InspectionRecord& r) {
    const StructuredAttributes a = extract_attributes(source_text(r), vocab);
    return std::make_pair(a.member.value_or("other"),
                          a.primary_damage().value_or("other"));
  };
  const RecordSet sampled = stratified_sample(records, n, seed, strata);
  save_records_csv(sampled, out);
  std::cout << "sampled " << sampled.size() << " of " << records.size()
            << " records (seed " << seed << ")\n";
  return 0;
}

// ---- extract / score -------------------------------------------------------

int cmd_extract(const std::string& records_path,
                const std::string& vocabulary_path,
                const std::optional<std::string>& out) {
  const RecordSet records = load_records_lenient(records_path);
  const Vocabulary vocab = load_vocabulary(vocabulary_path);
  std::ostringstream buf;
  CsvWriter w(buf);
  w.row({"image_id", "member", "damages", "location", "severity", "extent",
         "warnings"});
  for (const InspectionRecord& r : records.records) {
    std::vector<std::string> warnings;
    const StructuredAttributes a =
        extract_attributes(source_text(r), vocab, &warnings);
    std::string warn_cell;
    for (const std::string& warning : warnings) {
      if (!warn_cell.empty()) warn_cell += "; ";
      warn_cell += warning;
    }
    w.row({r.image_id, a.member.value_or(""), damages_cell(a.damages),
           a.location.value_or(""), a.severity.value_or(""),
           a.extent.value_or(""), warn_cell});
  }
  write_or_print(out, buf.str());
  return 0;
}

int cmd_score(const std::string& records_path, const std::string& rules_path,
              const std::string& vocabulary_path,
              const std::optional<std::string>& out) {
  const RecordSet records = load_records_lenient(records_path);
  const ScoringRules rules = load_rules(rules_path);
  const Vocabulary vocab = load_vocabulary(vocabulary_path);
  std::ostringstream buf;
  CsvWriter w(buf);
  w.row({"image_id", "member", "damages", "location", "severity", "extent",
         "base_score", "bonused_score", "priority_level", "priority_label"});
  for (const InspectionRecord& r : records.records) {
    const StructuredAttributes a = extract_attributes(source_text(r), vocab);
    const PriorityResult result = score_record(a, rules);
    w.row({r.image_id, a.member.value_or(""), damages_cell(a.damages),
           a.location.value_or(""), a.severity.value_or(""),
           a.extent.value_or(""), format_fixed(result.base_score, 4),
           format_fixed(result.bonused_score, 4), std::to_string(result.level),
           priority_label_name(result.label)});
  }
  write_or_print(out, buf.str());
  return 0;
}

// ---- guard -----------------------------------------------------------------

int cmd_guard(const std::string& records_path, const std::string& config_path,
              const std::string& judge_kind,
              const std::optional<std::string>& endpoint,
              const std::optional<std::string>& out) {
  const RecordSet records = load_records_lenient(records_path);
  const GuardConfig guard_cfg = load_guard_config(config_path);

  std::unique_ptr<JudgeBackend> judge;
  std::unique_ptr<HttpTransport> transport;
  if (judge_kind == "mock") {
    judge = std::make_unique<MockJudge>(guard_cfg);
  } else if (judge_kind == "http") {
    BackendConfig backend;
    backend.kind = BackendConfig::Kind::http;
    backend.endpoint = endpoint;
    transport = std::make_unique<DefaultHttpTransport>();
    judge = std::make_unique<HttpJudge>(backend, *transport);
  } else if (judge_kind != "none") {
    throw ConfigError("--judge must be mock, http, or none");
  }

  const std::vector<GuardOutcome> outcomes =
      guard_sweep(records, guard_cfg, judge.get(), ExecMode::parallel);

  std::ostringstream buf;
  CsvWriter w(buf);
  w.row({"image_id", "verdict", "reason", "stage", "note"});
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&records](std::size_t a, std::size_t b) {
    return records.records[a].image_id < records.records[b].image_id;
  });
  for (const std::size_t i : order) {
    const GuardOutcome& o = outcomes[i];
    w.row({records.records[i].image_id, guard_verdict_string(o.verdict),
           guard_reason_string(o.reason), std::to_string(o.stage),
           o.note.value_or("")});
  }
  if (out.has_value()) {
    write_or_print(out, buf.str());
  }
  print_outcome_table(aggregate_outcomes(outcomes));
  return 0;
}

// ---- evaluate --------------------------------------------------------------

int cmd_evaluate(const std::string& records_path, const std::string& preset_name,
                 const std::optional<std::string>& embeddings_path,
                 int dimension, const std::optional<std::string>& out) {
  const RecordSet records = load_records_lenient(records_path);
  const TierPreset preset = tier_preset_by_name(preset_name);

  SimilarityReport report;
  if (embeddings_path.has_value()) {
    FileEmbeddings stored = FileEmbeddings::load(*embeddings_path);
    report = evaluate_pairs(records, stored, preset, ExecMode::parallel);
  } else {
    MockEmbeddings source(static_cast<std::size_t>(dimension));
    TextEmbeddingAdapter adapter(source);
    report = evaluate_pairs(records, adapter, preset, ExecMode::parallel);
  }

  std::ostringstream buf;
  CsvWriter w(buf);
  w.row({"image_id", "rho", "tier"});
  for (const RecordSimilarity& r : report.per_record) {
    w.row({r.image_id, format_fixed(r.rho, 6),
           similarity_tier_string(classify_tier(r.rho, preset))});
  }
  if (out.has_value()) write_or_print(out, buf.str());

  nlohmann::json j;
  j["preset"] = report.preset_name;
  j["n_valid"] = report.n_valid;
  j["n_skipped"] = report.n_skipped;
  j["mean"] = report.mean;
  j["std_dev"] = report.std_dev;
  j["median"] = report.median;
  j["min"] = report.min;
  j["max"] = report.max;
  nlohmann::json tiers = nlohmann::json::array();
  for (const TierRow& t : report.tiers.rows) {
    nlohmann::json row;
    row["tier"] = similarity_tier_string(t.tier);
    row["count"] = t.count;
    row["percent_tenths"] = t.percent_tenths;
    tiers.push_back(row);
  }
  j["tiers"] = tiers;
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---- plan ------------------------------------------------------------------

int cmd_plan(const std::string& measurements_path, std::size_t n_images,
             const std::optional<std::string>& records_path,
             const PlanOptions& options, const std::optional<std::string>& out) {
  const std::vector<BatchMeasurement> measurements =
      load_measurements(measurements_path);
  std::optional<TokenStats> stats;
  if (records_path.has_value()) {
    const RecordSet records = load_records_lenient(*records_path);
    stats = token_stats(records, TokenizerConfig{});
  }
  const BatchPlan plan = build_plan(measurements, n_images, options, stats);
  write_or_print(out, serialize_plan_json(plan));
  return 0;
}

// ---- run-pipeline ----------------------------------------------------------

struct PipelineOverrides {
  std::optional<std::string> records;
  std::optional<std::string> rules;
  std::optional<std::string> preset;
  std::optional<std::string> judge;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
};

int cmd_run_pipeline(const std::string& config_path,
                     const PipelineOverrides& overrides) {
  PipelineConfig cfg = load_pipeline_config(config_path);
  if (overrides.records) cfg.records_path = *overrides.records;
  if (overrides.rules) cfg.rules_path = *overrides.rules;
  if (overrides.preset) cfg.tier_preset = *overrides.preset;
  if (overrides.judge) {
    cfg.judge.kind = *overrides.judge == "http" ? BackendConfig::Kind::http
                                                : BackendConfig::Kind::mock;
  }
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out) cfg.out_dir = *overrides.out;
  if (overrides.mode) {
    cfg.mode =
        *overrides.mode == "serial" ? ExecMode::serial : ExecMode::parallel;
  }

  const GuardConfig guard_cfg = load_guard_config(cfg.guard_config_path);
  const OwnedBackends backends = make_backends(cfg, guard_cfg);
  const PipelineResult result = run_pipeline(cfg, backends.view());

  print_outcome_table(result.outcome_table);
  if (result.similarity.has_value()) {
    std::cout << "similarity (" << result.similarity->preset_name
              << "): mean " << format_fixed(result.similarity->mean, 4)
              << " over " << result.similarity->n_valid << " pairs\n";
  }
  std::cout << "bundle written to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bridgescore: quality-guarded repair-priority scoring for "
      "bridge-inspection damage descriptions.\n"
      "Shared flags read environment overrides with the BRIDGESCORE_ prefix "
      "(explicit flags win).\n"
      "Exit codes: 0 ok, 1 unexpected, 2 config, 3 input data, 4 backend, "
      "5 judge protocol, 6 planning, 7 evaluation, 8 output."};
  app.require_subcommand(1);

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "Token statistics and window thresholds from a record set");
  std::string cal_records;
  double cal_low = 5.0, cal_high = 95.0;
  std::optional<std::string> cal_out;
  calibrate->add_option("--records", cal_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  calibrate->add_option("--rank-low", cal_low, "lower percentile rank");
  calibrate->add_option("--rank-high", cal_high, "upper percentile rank");
  calibrate->add_option("--out", cal_out, "write JSON here instead of stdout")
      ->envname("BRIDGESCORE_OUT");

  // filter-corpus
  auto* filter = app.add_subcommand(
      "filter-corpus", "Drop records failing the data-quality filters");
  std::string fil_records, fil_out;
  std::optional<std::string> fil_rejected;
  FilterConfig fil_cfg;
  filter->add_option("--records", fil_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  filter->add_option("--out", fil_out, "accepted records CSV")
      ->envname("BRIDGESCORE_OUT")
      ->required();
  filter->add_option("--rejected", fil_rejected, "rejection log CSV");
  filter->add_option("--min-chars", fil_cfg.min_chars, "minimum text length");
  filter->add_option("--max-chars", fil_cfg.max_chars, "maximum text length");
  filter->add_option("--invalid-pattern", fil_cfg.invalid_patterns,
                     "placeholder text marking an invalid record (repeatable)");
  filter->add_option("--member-term", fil_cfg.member_terms,
                     "required member vocabulary (repeatable; empty = skip)");
  filter->add_option("--damage-term", fil_cfg.damage_terms,
                     "required damage vocabulary (repeatable; empty = skip)");

  // sample
  auto* sample = app.add_subcommand(
      "sample", "Proportional stratified sample over (member, damage) strata");
  std::string smp_records, smp_vocab, smp_out;
  std::size_t smp_n = 0;
  std::uint64_t smp_seed = 0;
  sample->add_option("--records", smp_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  sample->add_option("--vocabulary", smp_vocab, "vocabulary YAML")
      ->envname("BRIDGESCORE_VOCABULARY")
      ->required();
  sample->add_option("--n", smp_n, "sample size")->required();
  sample->add_option("--seed", smp_seed, "sampling seed")
      ->envname("BRIDGESCORE_SEED");
  sample->add_option("--out", smp_out, "sampled records CSV")
      ->envname("BRIDGESCORE_OUT")
      ->required();

  // extract
  auto* extract = app.add_subcommand(
      "extract", "Structured damage attributes for each record");
  std::string ext_records, ext_vocab;
  std::optional<std::string> ext_out;
  extract->add_option("--records", ext_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  extract->add_option("--vocabulary", ext_vocab, "vocabulary YAML")
      ->envname("BRIDGESCORE_VOCABULARY")
      ->required();
  extract->add_option("--out", ext_out, "attributes CSV (default stdout)")
      ->envname("BRIDGESCORE_OUT");

  // score
  auto* score = app.add_subcommand(
      "score", "Extract and score every record (no quality guard)");
  std::string sc_records, sc_rules, sc_vocab;
  std::optional<std::string> sc_out;
  score->add_option("--records", sc_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  score->add_option("--rules", sc_rules, "scoring rules YAML")
      ->envname("BRIDGESCORE_RULES")
      ->required();
  score->add_option("--vocabulary", sc_vocab, "vocabulary YAML")
      ->envname("BRIDGESCORE_VOCABULARY")
      ->required();
  score->add_option("--out", sc_out, "scores CSV (default stdout)")
      ->envname("BRIDGESCORE_OUT");

  // guard
  auto* guard = app.add_subcommand(
      "guard", "Run the two-stage quality guard and print the outcome table");
  std::string gd_records, gd_config, gd_judge = "mock";
  std::optional<std::string> gd_endpoint, gd_out;
  guard->add_option("--records", gd_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  guard->add_option("--config", gd_config, "guard config YAML")
      ->envname("BRIDGESCORE_CONFIG")
      ->required();
  guard->add_option("--judge", gd_judge, "mock, http, or none (rule-only)")
      ->envname("BRIDGESCORE_JUDGE");
  guard->add_option("--endpoint", gd_endpoint, "judge endpoint for --judge http");
  guard->add_option("--out", gd_out, "per-record verdict CSV")
      ->envname("BRIDGESCORE_OUT");

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Ground-truth / prediction similarity with tier bands");
  std::string ev_records, ev_preset = "results";
  std::optional<std::string> ev_embeddings, ev_out;
  int ev_dim = 768;
  evaluate->add_option("--records", ev_records, "records CSV/JSONL")
      ->envname("BRIDGESCORE_RECORDS")
      ->required();
  evaluate
      ->add_option("--preset", ev_preset, "tier preset: results or table9")
      ->envname("BRIDGESCORE_PRESET");
  evaluate->add_option("--embeddings", ev_embeddings,
                       "stored vectors JSONL (default: deterministic mock)");
  evaluate->add_option("--dimension", ev_dim, "mock embedding dimension");
  evaluate->add_option("--out", ev_out, "per-record similarity CSV")
      ->envname("BRIDGESCORE_OUT");

  // plan
  auto* plan = app.add_subcommand(
      "plan", "Pick a batch size and project total runtime from measurements");
  std::string pl_measurements;
  std::size_t pl_n = 0;
  std::optional<std::string> pl_records, pl_out;
  PlanOptions pl_options;
  plan->add_option("--measurements", pl_measurements,
                   "CSV: batch_size,per_image_latency,memory_utilization,feasible")
      ->required();
  plan->add_option("--n-images", pl_n, "images in the projected run")
      ->required();
  plan->add_option("--records", pl_records,
                   "records for the token-budget statistics")
      ->envname("BRIDGESCORE_RECORDS");
  plan->add_option("--mem-cap", pl_options.mem_cap, "memory utilization cap");
  plan->add_option("--t-compile", pl_options.t_compile,
                   "one-time warm-up seconds");
  plan->add_option("--granularity", pl_options.granularity,
                   "token budget granularity");
  plan->add_option("--k", pl_options.k, "std-dev multiplier for the budget");
  plan->add_option("--out", pl_out, "plan JSON (default stdout)")
      ->envname("BRIDGESCORE_OUT");

  // run-pipeline
  auto* run = app.add_subcommand(
      "run-pipeline", "Full flow: guard, score, evaluate, report bundle");
  std::string rp_config;
  PipelineOverrides rp;
  run->add_option("--config", rp_config, "pipeline config YAML")
      ->envname("BRIDGESCORE_CONFIG")
      ->required();
  run->add_option("--records", rp.records, "override records path")
      ->envname("BRIDGESCORE_RECORDS");
  run->add_option("--rules", rp.rules, "override rules path")
      ->envname("BRIDGESCORE_RULES");
  run->add_option("--preset", rp.preset, "override tier preset")
      ->envname("BRIDGESCORE_PRESET");
  run->add_option("--judge", rp.judge, "override judge kind: mock or http")
      ->envname("BRIDGESCORE_JUDGE")
      ->check(CLI::IsMember({"mock", "http"}));
  run->add_option("--seed", rp.seed, "override seed")
      ->envname("BRIDGESCORE_SEED");
  run->add_option("--out", rp.out, "override output directory")
      ->envname("BRIDGESCORE_OUT");
  run->add_option("--mode", rp.mode, "override execution mode")
      ->check(CLI::IsMember({"serial", "parallel"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (calibrate->parsed())
      return cmd_calibrate(cal_records, cal_low, cal_high, cal_out);
    if (filter->parsed())
      return cmd_filter(fil_records, fil_cfg, fil_out, fil_rejected);
    if (sample->parsed())
      return cmd_sample(smp_records, smp_vocab, smp_n, smp_seed, smp_out);
    if (extract->parsed()) return cmd_extract(ext_records, ext_vocab, ext_out);
    if (score->parsed())
      return cmd_score(sc_records, sc_rules, sc_vocab, sc_out);
    if (guard->parsed())
      return cmd_guard(gd_records, gd_config, gd_judge, gd_endpoint, gd_out);
    if (evaluate->parsed())
      return cmd_evaluate(ev_records, ev_preset, ev_embeddings, ev_dim, ev_out);
    if (plan->parsed())
      return cmd_plan(pl_measurements, pl_n, pl_records, pl_options, pl_out);
    if (run->parsed()) return cmd_run_pipeline(rp_config, rp);
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const PlannerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == PlannerError::Kind::no_feasible_batch ? kExitPlan
                                                             : kExitConfig;
  } catch (const JudgeProtocolViolation& e) {
    std::cerr << "error: judge protocol: " << e.what() << "\n";
    return kExitJudge;
  } catch (const BackendError& e) {
    std::cerr << "error: backend: " << e.what() << "\n";
    return kExitBackend;
  } catch (const EvaluationError& e) {
    std::cerr << "error: evaluation: " << e.what() << "\n";
    return kExitEvaluation;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CsvParseError& e) {
    std::cerr << "error: input data: " << e.what() << "\n";
    return kExitData;
  } catch (const CorpusError& e) {
    std::cerr << "error: input data: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
