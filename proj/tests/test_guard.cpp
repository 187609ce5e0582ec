#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bridgescore/backends.hpp"
#include "bridgescore/errors.hpp"
#include "bridgescore/guard.hpp"
#include "bridgescore/stats.hpp"
#include "bridgescore/tokenize.hpp"
#include "support/fixture800.hpp"

using namespace bridgescore;

namespace {

const GuardConfig& shipped_config() {
  static const GuardConfig cfg = load_guard_config(std::string(TEST_CONFIG_DIR) + "/guard.yaml");
  return cfg;
}

InspectionRecord record_with(std::string text, std::optional<int> token_count = std::nullopt,
                             std::optional<std::string> image_path = std::nullopt) {
  InspectionRecord r;
  r.image_id = "r1";
  r.prediction_text = std::move(text);
  r.token_count = token_count;
  r.image_path = std::move(image_path);
  return r;
}

std::string spaced_tokens(std::size_t n, const std::string& prefix) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += prefix + std::to_string(i);
  }
  return out;
}

/// Scripted judge for protocol tests.
struct ScriptedJudge : JudgeBackend {
  std::string response;
  explicit ScriptedJudge(std::string r) : response(std::move(r)) {}
  std::string judge(const JudgeRequest&) override { return response; }
};

/// Brute-force repetition census: enumerates every n-gram with exact string
/// maps and a boolean coverage mask — no hashing, no shared code with the
/// production detector.
struct CensusResult {
  bool flag = false;
  double coverage = 0.0;
  std::string witness;
  std::size_t occurrences = 0;
  std::size_t ngram_len = 0;
};

CensusResult census(const std::vector<std::string>& tokens, const RepetitionParams& p) {
  CensusResult result;
  const std::size_t total = tokens.size();
  if (total == 0 || p.ngram_len < 1 || p.min_occurrences < 1) return result;

  struct Cand {
    double coverage;
    std::size_t n;
    std::size_t first;
    std::size_t count;
  };
  std::vector<Cand> cands;

  for (std::size_t n = p.ngram_len; n <= total; ++n) {
    if (total - n + 1 < p.min_occurrences) break;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i + n <= total; ++i) {
      std::string key;
      for (std::size_t k = 0; k < n; ++k) {
        key += tokens[i + k];
        key += '\x1f';
      }
      groups[key].push_back(i);
    }
    for (const auto& [key, positions] : groups) {
      if (positions.size() < p.min_occurrences) continue;
      std::vector<char> mask(total, 0);
      for (std::size_t s : positions)
        for (std::size_t k = 0; k < n; ++k) mask[s + k] = 1;
      const auto covered =
          static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char(1)));
      const double coverage = static_cast<double>(covered) / static_cast<double>(total);
      if (coverage < p.coverage_min) continue;
      cands.push_back({coverage, n, positions.front(), positions.size()});
    }
  }
  if (cands.empty()) return result;
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    if (a.n != b.n) return a.n < b.n;
    return a.first < b.first;
  });
  const Cand& best = cands.front();
  result.flag = true;
  result.coverage = best.coverage;
  result.occurrences = best.count;
  result.ngram_len = best.n;
  for (std::size_t k = 0; k < best.n; ++k) {
    if (k) result.witness += ' ';
    result.witness += tokens[best.first + k];
  }
  return result;
}

}  // namespace

TEST_CASE("guard: shipped config loads with the calibrated window") {
  const GuardConfig& cfg = shipped_config();
  CHECK(cfg.theta_low == 98);
  CHECK(cfg.theta_high == 202);
  CHECK_FALSE(cfg.reject_above_high);
  CHECK(cfg.repetition.ngram_len == 8);
  CHECK(cfg.repetition.min_occurrences == 3);
  CHECK(cfg.repetition.coverage_min == doctest::Approx(0.30));
  CHECK(!cfg.damage_keywords.empty());
  CHECK(!cfg.vague_phrases.empty());
  CHECK(!cfg.dirty_phrases.empty());
  CHECK(cfg.scope_prompt_id == "scope_v1");
  CHECK(validate_guard_config(cfg).empty());
}

TEST_CASE("guard: config validation collects every violation") {
  GuardConfig cfg = shipped_config();
  cfg.theta_low = 300;   // inverted window
  cfg.repetition.ngram_len = 1;
  cfg.repetition.coverage_min = 1.5;
  cfg.scope_prompt_id.clear();
  auto problems = validate_guard_config(cfg);
  CHECK(problems.size() == 4);

  CHECK_THROWS_AS(parse_guard_config_yaml("theta_low: 300\ntheta_high: 200\n"), ConfigError);
  CHECK_THROWS_AS(parse_guard_config_yaml("surprise_key: 1\n"), ConfigError);
  CHECK_THROWS_AS(load_guard_config("/nonexistent/guard.yaml"), std::runtime_error);
}

TEST_CASE("guard: repetition detector on hand-built texts") {
  RepetitionParams tight{3, 3, 0.3};

  SUBCASE("a b c tiled ten times is fully covered") {
    std::string text;
    for (int i = 0; i < 10; ++i) text += "a b c ";
    RepetitionReport rep = detect_repetition(text, tight);
    CHECK(rep.flag);
    CHECK(rep.coverage == doctest::Approx(1.0));
    CHECK(rep.witness == "a b c");
    CHECK(rep.ngram_len == 3);
    CHECK(rep.occurrences == 10);
  }
  SUBCASE("shorter than the n-gram length never flags") {
    CHECK_FALSE(detect_repetition("a b", tight).flag);
    CHECK_FALSE(detect_repetition("", tight).flag);
  }
  SUBCASE("distinct tokens never flag") {
    CHECK_FALSE(detect_repetition(spaced_tokens(150, "w"), RepetitionParams{}).flag);
  }
  SUBCASE("coverage below the floor does not flag") {
    // 3-gram occurs 3 times = 9 covered of 40 -> 0.225 < 0.3
    std::string text = "x y z x y z x y z " + spaced_tokens(31, "pad");
    RepetitionReport rep = detect_repetition(text, RepetitionParams{3, 3, 0.3});
    CHECK_FALSE(rep.flag);
    // same text, lower floor -> flags
    CHECK(detect_repetition(text, RepetitionParams{3, 3, 0.2}).flag);
  }
  SUBCASE("occurrence floor honoured") {
    std::string text = "p q r p q r " + spaced_tokens(6, "pad");
    CHECK_FALSE(detect_repetition(text, RepetitionParams{3, 3, 0.2}).flag);
    CHECK(detect_repetition(text, RepetitionParams{3, 2, 0.2}).flag);
  }
}

TEST_CASE("guard: repetition detector agrees with the brute-force census") {
  DetRng rng(0x9e51a7e5u);
  std::size_t flagged = 0;
  for (int trial = 0; trial < 200; ++trial) {
    RepetitionParams p;
    p.ngram_len = 2 + rng.below(9);        // 2..10
    p.min_occurrences = 2 + rng.below(3);  // 2..4
    p.coverage_min = std::array<double, 3>{0.2, 0.3, 0.5}[rng.below(3)];

    std::size_t length;
    if (trial < 160)
      length = 20 + rng.below(101);
    else if (trial < 196)
      length = 120 + rng.below(141);
    else
      length = 400 + rng.below(101);

    const std::size_t alphabet = 2 + rng.below(5);
    std::vector<std::string> tokens;
    tokens.reserve(length);
    if (rng.below(2) == 0) {
      // engineered: tile a block, then random tail
      const std::size_t block_len = p.ngram_len + rng.below(5);
      const std::size_t copies = p.min_occurrences + rng.below(3);
      std::vector<std::string> block;
      for (std::size_t k = 0; k < block_len; ++k)
        block.push_back("a" + std::to_string(rng.below(alphabet)));
      for (std::size_t c = 0; c < copies && tokens.size() < length; ++c)
        for (const auto& t : block) {
          if (tokens.size() >= length) break;
          tokens.push_back(t);
        }
    }
    while (tokens.size() < length)
      tokens.push_back("a" + std::to_string(rng.below(alphabet)));

    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) text += ' ';
      text += tokens[i];
    }
    REQUIRE(tokenize(text) == tokens);

    CensusResult expect = census(tokens, p);
    RepetitionReport got = detect_repetition(text, p);
    REQUIRE(got.flag == expect.flag);
    if (expect.flag) {
      ++flagged;
      CHECK(got.coverage == expect.coverage);
      CHECK(got.ngram_len == expect.ngram_len);
      CHECK(got.occurrences == expect.occurrences);
      CHECK(got.witness == expect.witness);
    }
  }
  // the harness must actually exercise positives
  CHECK(flagged > 40);
}

TEST_CASE("guard: stage-1 rules in order") {
  const GuardConfig& cfg = shipped_config();

  SUBCASE("97 tokens fail short, 98 continue") {
    auto short_rec = record_with("a crack description", 97);
    auto outcome = stage1(short_rec, cfg);
    REQUIRE(outcome.has_value());
    CHECK(outcome->verdict == GuardVerdict::fail);
    CHECK(outcome->reason == GuardReason::short_description);
    CHECK(outcome->stage == 1);

    auto through = record_with("a crack description", 98);
    CHECK_FALSE(stage1(through, cfg).has_value());
  }
  SUBCASE("missing image file fails at stage 0 before any text rule") {
    auto rec = record_with("tiny", 5, "/nonexistent/img.jpg");
    auto outcome = stage1(rec, cfg);
    REQUIRE(outcome.has_value());
    CHECK(outcome->reason == GuardReason::no_such_file);
    CHECK(outcome->stage == 0);
    CHECK(outcome->verdict == GuardVerdict::fail);
  }
  SUBCASE("an existing image file is not a failure") {
    auto rec = record_with("a crack description", 120,
                           std::string(TEST_CONFIG_DIR) + "/guard.yaml");
    CHECK_FALSE(stage1(rec, cfg).has_value());
  }
  SUBCASE("absent prediction text is not recognised") {
    InspectionRecord r;
    r.image_id = "r0";
    auto outcome = stage1(r, cfg);
    REQUIRE(outcome.has_value());
    CHECK(outcome->reason == GuardReason::not_recognised_from_only_image);
  }
  SUBCASE("repetitive in-window text is dirty or noisy") {
    std::string text = fixture::repeated_block(7, 5) + " " + spaced_tokens(60, "pad");
    auto rec = record_with(text);
    auto outcome = stage1(rec, cfg);
    REQUIRE(outcome.has_value());
    CHECK(outcome->reason == GuardReason::dirty_or_noisy_image);
    REQUIRE(outcome->note.has_value());
    CHECK(outcome->note->find("repetition coverage") != std::string::npos);
  }
  SUBCASE("vague text with no damage keyword is not recognised") {
    auto rec = record_with("the condition cannot identify anything from here", 120);
    auto outcome = stage1(rec, cfg);
    REQUIRE(outcome.has_value());
    CHECK(outcome->reason == GuardReason::not_recognised_from_only_image);
  }
  SUBCASE("a damage keyword disables the vague rule") {
    auto rec = record_with("surface crack present although details are unclear", 120);
    CHECK_FALSE(stage1(rec, cfg).has_value());
  }
  SUBCASE("short wins over vague when both apply") {
    auto rec = record_with("cannot identify anything", 12);
    auto outcome = stage1(rec, cfg);
    REQUIRE(outcome.has_value());
    CHECK(outcome->reason == GuardReason::short_description);
  }
  SUBCASE("overlong text passes by default and fails when the flag is set") {
    auto rec = record_with("long crack description", 250);
    CHECK_FALSE(stage1(rec, cfg).has_value());

    GuardConfig strict = cfg;
    strict.reject_above_high = true;
    auto outcome = stage1(rec, strict);
    REQUIRE(outcome.has_value());
    CHECK(outcome->reason == GuardReason::dirty_or_noisy_image);
    REQUIRE(outcome->note.has_value());
    CHECK(outcome->note->find("overly long") != std::string::npos);
  }
}

TEST_CASE("guard: verdict parser round-trips all eight keyword pairs") {
  const std::array<std::pair<std::string, GuardVerdict>, 2> verdicts = {
      {{"PASS", GuardVerdict::pass}, {"FAIL", GuardVerdict::fail}}};
  const std::array<std::pair<std::string, GuardReason>, 4> reasons = {
      {{"High Quality", GuardReason::high_quality},
       {"Short description", GuardReason::short_description},
       {"Dirty or Noisy image", GuardReason::dirty_or_noisy_image},
       {"Not recognised from only image", GuardReason::not_recognised_from_only_image}}};
  for (const auto& [vs, vv] : verdicts) {
    for (const auto& [rs, rv] : reasons) {
      const std::string raw = "VERDICT: " + vs + "\nREASON_CODE: " + rs;
      ParsedVerdict parsed = parse_verdict(raw);
      CHECK(parsed.verdict == vv);
      CHECK(parsed.reason == rv);
    }
  }
}

TEST_CASE("guard: verdict parser tolerates mess around the two lines") {
  ParsedVerdict a = parse_verdict("\n\n   VERDICT:   PASS  \r\n  REASON_CODE: High Quality \r\n");
  CHECK(a.verdict == GuardVerdict::pass);
  CHECK(a.reason == GuardReason::high_quality);

  ParsedVerdict b = parse_verdict(
      "VERDICT: FAIL\nREASON_CODE: Short description\nAdditional commentary that the judge "
      "appended.\nVERDICT: PASS");
  CHECK(b.verdict == GuardVerdict::fail);
  CHECK(b.reason == GuardReason::short_description);

  // a stray reason before the verdict is ignored; one must follow the verdict
  ParsedVerdict c =
      parse_verdict("REASON_CODE: Short description\nVERDICT: PASS\nREASON_CODE: High Quality");
  CHECK(c.verdict == GuardVerdict::pass);
  CHECK(c.reason == GuardReason::high_quality);
}

TEST_CASE("guard: five malformed responses produce the three protocol error kinds") {
  const std::array<std::string, 5> malformed = {
      "maybe fine",                                       // nothing at all
      "VERDICT: PASS",                                    // reason line missing
      "VERDICT: OK\nREASON_CODE: High Quality",           // bad verdict keyword
      "verdict: PASS\nREASON_CODE: High Quality",         // wrong case, line missing
      "VERDICT: PASS\nREASON_CODE: Totally Fine",         // bad reason
  };
  std::set<ProtocolErrorKind> kinds;
  for (const auto& raw : malformed) {
    try {
      parse_verdict(raw);
      FAIL((std::string("expected JudgeProtocolViolation for: ") + raw));
    } catch (const JudgeProtocolViolation& e) {
      kinds.insert(e.kind());
      CHECK(e.raw() == raw);
    }
  }
  CHECK(kinds == std::set<ProtocolErrorKind>{ProtocolErrorKind::missing_line,
                                             ProtocolErrorKind::unknown_verdict,
                                             ProtocolErrorKind::unknown_reason});

  // reason from the wrong side parses but is rejected by stage 2
  const GuardConfig& cfg = shipped_config();
  ScriptedJudge crossed("VERDICT: PASS\nREASON_CODE: Short description");
  try {
    stage2("r1", "text", crossed, cfg);
    FAIL("expected JudgeProtocolViolation");
  } catch (const JudgeProtocolViolation& e) {
    CHECK(e.kind() == ProtocolErrorKind::inconsistent_reason);
  }
  ScriptedJudge crossed_fail("VERDICT: FAIL\nREASON_CODE: High Quality");
  CHECK_THROWS_AS(stage2("r1", "text", crossed_fail, cfg), JudgeProtocolViolation);
}

TEST_CASE("guard: stage 2 wraps the judge verdict") {
  const GuardConfig& cfg = shipped_config();
  MockJudge judge(cfg);
  const std::string text = "crack " + spaced_tokens(120, "w");
  GuardOutcome outcome = stage2("r1", text, judge, cfg);
  CHECK(outcome.verdict == GuardVerdict::pass);
  CHECK(outcome.reason == GuardReason::high_quality);
  CHECK(outcome.stage == 2);
  REQUIRE(outcome.judge_raw.has_value());
  CHECK(*outcome.judge_raw == "VERDICT: PASS\nREASON_CODE: High Quality");
  CHECK(judge.calls() == 1);
}

TEST_CASE("guard: stage-1 failures never reach the judge") {
  const GuardConfig& cfg = shipped_config();
  MockJudge judge(cfg);
  auto rec = record_with("too short to score", 12);
  GuardOutcome outcome = guard_record(rec, cfg, &judge);
  CHECK(outcome.verdict == GuardVerdict::fail);
  CHECK(judge.calls() == 0);
}

TEST_CASE("guard: rule-only mode passes survivors without a judge") {
  const GuardConfig& cfg = shipped_config();
  auto rec = record_with("a crack description", 120);
  GuardOutcome outcome = guard_record(rec, cfg, nullptr);
  CHECK(outcome.verdict == GuardVerdict::pass);
  CHECK(outcome.reason == GuardReason::high_quality_rule_only);
  CHECK(outcome.stage == 1);
  CHECK_FALSE(outcome.judge_raw.has_value());
}

TEST_CASE("guard: aggregation groups, sorts, and rounds") {
  std::vector<GuardOutcome> outcomes;
  for (int i = 0; i < 7; ++i)
    outcomes.push_back({GuardVerdict::pass, GuardReason::high_quality, 2, std::nullopt, std::nullopt});
  for (int i = 0; i < 2; ++i)
    outcomes.push_back({GuardVerdict::fail, GuardReason::short_description, 1, std::nullopt, std::nullopt});
  outcomes.push_back({GuardVerdict::fail, GuardReason::dirty_or_noisy_image, 1, std::nullopt, std::nullopt});

  OutcomeTable table = aggregate_outcomes(outcomes);
  CHECK(table.total == 10);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].count == 7);
  CHECK(table.rows[0].percent_tenths == 700);
  CHECK(table.rows[1].reason == GuardReason::short_description);
  CHECK(table.rows[1].percent_tenths == 200);
  CHECK(table.rows[2].reason == GuardReason::dirty_or_noisy_image);
  CHECK(table.rows[2].percent_tenths == 100);
  CHECK(table.pass_total == 7);
  CHECK(table.fail_total == 3);

  OutcomeTable empty = aggregate_outcomes({});
  CHECK(empty.total == 0);
  CHECK(empty.rows.empty());

  std::vector<GuardOutcome> all_pass(100);
  OutcomeTable full = aggregate_outcomes(all_pass);
  CHECK(full.rows.size() == 1);
  CHECK(full.rows[0].percent_tenths == 1000);
}

TEST_CASE("guard: engineered 800-record corpus reproduces both published tables") {
  const GuardConfig& cfg = shipped_config();
  const RecordSet rs = fixture::build_guard_fixture_800();
  REQUIRE(rs.size() == 800);

  SUBCASE("calibration census: 700/35/27/24/12/2 and the 87.5/12.5 split") {
    CalibrationCensus c = calibration_census(rs, cfg);
    REQUIRE(c.rows.size() == 6);
    std::map<CalibrationLabel, std::pair<std::size_t, std::int64_t>> got;
    for (const auto& row : c.rows) got[row.label] = {row.count, row.percent_tenths};
    CHECK(got[CalibrationLabel::acceptable] == std::pair<std::size_t, std::int64_t>{700, 875});
    CHECK(got[CalibrationLabel::short_description] ==
          std::pair<std::size_t, std::int64_t>{35, 44});
    CHECK(got[CalibrationLabel::overly_long] == std::pair<std::size_t, std::int64_t>{27, 34});
    CHECK(got[CalibrationLabel::repetitive] == std::pair<std::size_t, std::int64_t>{24, 30});
    CHECK(got[CalibrationLabel::dirty_or_noisy] == std::pair<std::size_t, std::int64_t>{12, 15});
    CHECK(got[CalibrationLabel::not_recognised] == std::pair<std::size_t, std::int64_t>{2, 2});
    CHECK(c.low_quality_total == 100);
    CHECK(c.low_quality_percent_tenths == 125);
  }

  SUBCASE("final outcomes: 727/36/35/2 at 90.9/4.5/4.4/0.2") {
    MockJudge judge(cfg);
    std::vector<GuardOutcome> outcomes = guard_sweep(rs, cfg, &judge);
    OutcomeTable table = aggregate_outcomes(outcomes);
    CHECK(table.total == 800);
    REQUIRE(table.rows.size() == 4);

    CHECK(table.rows[0].verdict == GuardVerdict::pass);
    CHECK(table.rows[0].reason == GuardReason::high_quality);
    CHECK(table.rows[0].count == 727);
    CHECK(table.rows[0].percent_tenths == 909);

    CHECK(table.rows[1].reason == GuardReason::dirty_or_noisy_image);
    CHECK(table.rows[1].count == 36);
    CHECK(table.rows[1].percent_tenths == 45);

    CHECK(table.rows[2].reason == GuardReason::short_description);
    CHECK(table.rows[2].count == 35);
    CHECK(table.rows[2].percent_tenths == 44);

    CHECK(table.rows[3].reason == GuardReason::no_such_file);
    CHECK(table.rows[3].count == 2);
    CHECK(table.rows[3].percent_tenths == 2);

    CHECK(table.pass_total == 727);
    CHECK(table.fail_total == 73);
    CHECK(table.pass_percent_tenths == 909);
    CHECK(table.fail_percent_tenths == 91);

    // the judge saw exactly the stage-1 survivors
    CHECK(judge.calls() == 727);
  }

  SUBCASE("sweep is order-independent and identical in both execution modes") {
    MockJudge judge_serial(cfg);
    MockJudge judge_parallel(cfg);
    auto serial = guard_sweep(rs, cfg, &judge_serial, ExecMode::serial);
    auto parallel = guard_sweep(rs, cfg, &judge_parallel, ExecMode::parallel);
    CHECK(serial == parallel);

    RecordSet reversed = rs;
    std::reverse(reversed.records.begin(), reversed.records.end());
    MockJudge judge_rev(cfg);
    auto rev = guard_sweep(reversed, cfg, &judge_rev, ExecMode::parallel);
    std::reverse(rev.begin(), rev.end());
    CHECK(rev == serial);
    CHECK(aggregate_outcomes(rev).rows == aggregate_outcomes(serial).rows);
  }
}

TEST_CASE("guard: sweep propagates judge protocol errors") {
  const GuardConfig& cfg = shipped_config();
  RecordSet rs;
  for (int i = 0; i < 3; ++i) {
    auto rec = record_with("a crack description", 120);
    rec.image_id = "p" + std::to_string(i);
    rs.records.push_back(rec);
  }
  ScriptedJudge bad("nonsense");
  CHECK_THROWS_AS(guard_sweep(rs, cfg, &bad, ExecMode::parallel), JudgeProtocolViolation);
}
