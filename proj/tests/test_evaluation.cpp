#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "bridgescore/backends.hpp"
#include "bridgescore/errors.hpp"
#include "bridgescore/evaluation.hpp"
#include "bridgescore/stats.hpp"
#include "support/fixture800.hpp"

using namespace bridgescore;

namespace {

InspectionRecord pair_record(std::string id, std::string gt, std::string pred) {
  InspectionRecord r;
  r.image_id = std::move(id);
  r.ground_truth_text = std::move(gt);
  r.prediction_text = std::move(pred);
  return r;
}

std::vector<double> random_vector(DetRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = 2.0 * rng.unit() - 1.0;
  return v;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("evaluation: cosine on hand-checkable vectors") {
  const std::vector<double> ex = {1.0, 0.0};
  const std::vector<double> ey = {0.0, 1.0};
  const std::vector<double> diag = {1.0, 1.0};

  CHECK(cosine_similarity(ex, ex) == 1.0);
  CHECK(cosine_similarity(ex, ey) == 0.0);
  CHECK(cosine_similarity(ex, std::vector<double>{-1.0, 0.0}) == -1.0);
  CHECK(cosine_similarity(ex, diag) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // self-similarity of an arbitrary vector clamps to exactly 1
  const std::vector<double> v = {0.3, -0.7, 0.55, 0.11};
  CHECK(cosine_similarity(v, v) == 1.0);

  try {
    cosine_similarity(ex, std::vector<double>{1.0, 0.0, 0.0});
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::dimension_mismatch);
  }
  try {
    cosine_similarity(ex, std::vector<double>{0.0, 0.0});
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::zero_vector);
  }
}

TEST_CASE("evaluation: cosine is scale-invariant, symmetric, and bounded") {
  DetRng rng(0x5ca1ab1eu);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.below(16);
    std::vector<double> u = random_vector(rng, dim);
    std::vector<double> v = random_vector(rng, dim);
    u[rng.below(dim)] += 0.5;  // keep away from the zero vector
    v[rng.below(dim)] -= 0.5;
    double nu = 0.0, nv = 0.0;
    for (double x : u) nu += x * x;
    for (double x : v) nv += x * x;
    if (nu == 0.0 || nv == 0.0) continue;

    const double rho = cosine_similarity(u, v);
    CHECK(rho >= -1.0);
    CHECK(rho <= 1.0);
    CHECK(cosine_similarity(v, u) == rho);

    const double alpha = 0.01 + 9.99 * rng.unit();
    const double beta = 0.01 + 9.99 * rng.unit();
    std::vector<double> us = u;
    std::vector<double> vs = v;
    for (double& x : us) x *= alpha;
    for (double& x : vs) x *= beta;
    CHECK(std::abs(cosine_similarity(us, vs) - rho) <= 1e-12);
  }
}

TEST_CASE("evaluation: tier presets and classification") {
  const TierPreset results = results_tier_preset();
  CHECK(results.name == "results");
  CHECK(results.excellent_min == 0.85);
  CHECK(results.good_min == 0.70);
  CHECK(results.acceptable_min == 0.60);
  CHECK(results.poor_min == 0.50);

  const TierPreset strict = table9_tier_preset();
  CHECK(strict.good_min == 0.75);
  CHECK(strict.acceptable_min == 0.65);
  CHECK(strict.excellent_min == 0.85);
  CHECK(strict.poor_min == 0.50);

  CHECK(tier_preset_by_name("results") == results);
  CHECK(tier_preset_by_name("table9") == strict);
  CHECK_THROWS_AS(tier_preset_by_name("strictest"), ConfigError);

  CHECK(validate_tier_preset(results).empty());
  TierPreset broken = results;
  broken.good_min = 0.90;  // not descending
  CHECK(validate_tier_preset(broken).size() == 1);

  CHECK(classify_tier(0.6850, results) == SimilarityTier::acceptable);
  CHECK(classify_tier(0.7081, results) == SimilarityTier::good);
  CHECK(classify_tier(0.85, results) == SimilarityTier::excellent);
  CHECK(classify_tier(std::nextafter(0.85, 0.0), results) == SimilarityTier::good);
  CHECK(classify_tier(0.50, results) == SimilarityTier::poor);
  CHECK(classify_tier(0.499, results) == SimilarityTier::very_poor);
  CHECK(classify_tier(-1.0, results) == SimilarityTier::very_poor);

  // the same value can land in different tiers under the two presets
  CHECK(classify_tier(0.72, results) == SimilarityTier::good);
  CHECK(classify_tier(0.72, strict) == SimilarityTier::acceptable);

  CHECK(std::string(similarity_tier_string(SimilarityTier::excellent)) == "Excellent");
  CHECK(std::string(similarity_tier_string(SimilarityTier::very_poor)) == "Very Poor");
}

TEST_CASE("evaluation: classification is monotone in the similarity") {
  DetRng rng(0x0d15ea5eu);
  const TierPreset preset = results_tier_preset();
  std::vector<double> rhos;
  for (int i = 0; i < 200; ++i) rhos.push_back(2.0 * rng.unit() - 1.0);
  std::sort(rhos.begin(), rhos.end());
  for (std::size_t i = 1; i < rhos.size(); ++i)
    CHECK(static_cast<int>(classify_tier(rhos[i - 1], preset)) <=
          static_cast<int>(classify_tier(rhos[i], preset)));
}

TEST_CASE("evaluation: tier distribution reproduces the published five-row table") {
  const TierDistribution dist = tier_distribution(fixture::tier_rhos_800(), results_tier_preset());
  CHECK(dist.total == 800);
  REQUIRE(dist.rows.size() == 5);

  const std::array<std::size_t, 5> counts = {1, 375, 321, 85, 18};
  const std::array<std::int64_t, 5> tenths = {1, 469, 401, 106, 22};
  const std::array<SimilarityTier, 5> order = {SimilarityTier::excellent, SimilarityTier::good,
                                               SimilarityTier::acceptable, SimilarityTier::poor,
                                               SimilarityTier::very_poor};
  std::size_t count_sum = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(dist.rows[i].tier == order[i]);
    CHECK(dist.rows[i].count == counts[i]);
    CHECK(dist.rows[i].percent_tenths == tenths[i]);
    count_sum += dist.rows[i].count;
  }
  CHECK(count_sum == 800);
}

TEST_CASE("evaluation: tier distribution edge shapes") {
  const TierPreset preset = results_tier_preset();

  TierDistribution all_excellent = tier_distribution(std::vector<double>(100, 0.99), preset);
  CHECK(all_excellent.rows[0].count == 100);
  CHECK(all_excellent.rows[0].percent_tenths == 1000);
  for (std::size_t i = 1; i < 5; ++i) CHECK(all_excellent.rows[i].count == 0);

  TierDistribution empty = tier_distribution({}, preset);
  CHECK(empty.total == 0);
  for (const auto& row : empty.rows) CHECK(row.count == 0);

  // 20 random values against independent brute-force bucketing
  DetRng rng(0xfeedbea7u);
  std::vector<double> rhos;
  for (int i = 0; i < 20; ++i) rhos.push_back(2.0 * rng.unit() - 1.0);
  TierDistribution dist = tier_distribution(rhos, preset);
  const auto in_band = [&](double lo, double hi) {
    return static_cast<std::size_t>(std::count_if(
        rhos.begin(), rhos.end(), [&](double r) { return r >= lo && (hi > 1.0 || r < hi); }));
  };
  CHECK(dist.rows[0].count == in_band(0.85, 2.0));
  CHECK(dist.rows[1].count == in_band(0.70, 0.85));
  CHECK(dist.rows[2].count == in_band(0.60, 0.70));
  CHECK(dist.rows[3].count == in_band(0.50, 0.60));
  CHECK(dist.rows[4].count == rhos.size() - dist.rows[0].count - dist.rows[1].count -
                                  dist.rows[2].count - dist.rows[3].count);
}

TEST_CASE("evaluation: three synthetic pairs match the hand computation") {
  RecordSet rs;
  rs.records.push_back(pair_record("a1", "gt one", "pred one"));
  rs.records.push_back(pair_record("a2", "gt two", "pred two"));
  rs.records.push_back(pair_record("a3", "gt three", "pred three"));

  std::map<std::string, std::vector<double>> by_id = {
      {"a1/gt", {1.0, 0.0}},  {"a1/pred", {1.0, 0.0}},  // rho = 1
      {"a2/gt", {1.0, 0.0}},  {"a2/pred", {0.0, 1.0}},  // rho = 0
      {"a3/gt", {1.0, 1.0}},  {"a3/pred", {1.0, 0.0}},  // rho = 1/sqrt(2)
  };
  FileEmbeddings embeddings(2, by_id);

  SimilarityReport report = evaluate_pairs(rs, embeddings, results_tier_preset());
  CHECK(report.n_valid == 3);
  CHECK(report.n_skipped == 0);
  REQUIRE(report.per_record.size() == 3);
  CHECK(report.per_record[0].image_id == "a1");
  CHECK(report.per_record[0].rho == 1.0);
  CHECK(report.per_record[1].rho == 0.0);
  CHECK(report.per_record[2].rho == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  const double r3 = 1.0 / std::sqrt(2.0);
  const double mean = (1.0 + 0.0 + r3) / 3.0;
  double sq = (1.0 - mean) * (1.0 - mean) + mean * mean + (r3 - mean) * (r3 - mean);
  CHECK(report.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(report.std_dev == doctest::Approx(std::sqrt(sq / 3.0)).epsilon(1e-12));
  CHECK(report.median == doctest::Approx(r3).epsilon(1e-15));
  CHECK(report.min == 0.0);
  CHECK(report.max == 1.0);

  // tiers: 1.0 excellent, 0.7071 good, 0.0 very poor
  CHECK(report.tiers.rows[0].count == 1);
  CHECK(report.tiers.rows[1].count == 1);
  CHECK(report.tiers.rows[4].count == 1);
  CHECK(report.preset_name == "results");
}

TEST_CASE("evaluation: records lacking either text are skipped, not scored") {
  RecordSet rs = fixture::build_guard_fixture_800();
  MockEmbeddings source(32);
  TextEmbeddingAdapter adapter(source);
  SimilarityReport report = evaluate_pairs(rs, adapter, results_tier_preset());
  CHECK(report.n_valid == 798);
  CHECK(report.n_skipped == 2);
  CHECK(report.per_record.size() == 798);
  for (const auto& entry : report.per_record) {
    CHECK(entry.rho >= -1.0);
    CHECK(entry.rho <= 1.0);
  }
}

TEST_CASE("evaluation: the report ignores record order and execution mode") {
  RecordSet rs = fixture::build_guard_fixture_800();
  MockEmbeddings source(16);
  TextEmbeddingAdapter adapter(source);
  const TierPreset preset = results_tier_preset();

  SimilarityReport base = evaluate_pairs(rs, adapter, preset, ExecMode::serial);

  RecordSet shuffled = rs;
  DetRng rng(0x7ab1e5eedull);
  rng.shuffle(shuffled.records);
  SimilarityReport reordered = evaluate_pairs(shuffled, adapter, preset, ExecMode::serial);
  CHECK(base == reordered);

  SimilarityReport parallel = evaluate_pairs(rs, adapter, preset, ExecMode::parallel);
  CHECK(base == parallel);
}

TEST_CASE("evaluation: an empty valid set is an error") {
  RecordSet none;
  std::map<std::string, std::vector<double>> empty_map;
  FileEmbeddings embeddings(4, empty_map);
  CHECK_THROWS_AS(evaluate_pairs(none, embeddings, results_tier_preset()), EvaluationError);

  RecordSet textless;
  InspectionRecord r;
  r.image_id = "t1";
  r.ground_truth_text = "only the reference";
  textless.records.push_back(r);
  try {
    evaluate_pairs(textless, embeddings, results_tier_preset());
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::empty_evaluation);
  }
}

TEST_CASE("evaluation: embedding files round-trip and flag gaps") {
  std::map<std::string, std::vector<double>> by_id = {
      {"b1/gt", {0.5, 0.25, -1.0}},
      {"b1/pred", {0.1 + 0.2, 1.0 / 3.0, 0.07}},
      {"b2/gt", {1.0, 0.0, 0.0}},
  };
  FileEmbeddings embeddings(3, by_id);
  CHECK(embeddings.size() == 3);

  TempFile file("bridgescore_test_embeddings.jsonl");
  embeddings.save(file.path);
  FileEmbeddings loaded = FileEmbeddings::load(file.path);
  CHECK(loaded.dimension() == 3);
  CHECK(loaded.size() == 3);

  InspectionRecord b1 = pair_record("b1", "gt", "pred");
  auto [gt, pred] = loaded.vectors_for(b1);
  CHECK(gt == by_id["b1/gt"]);
  CHECK(pred == by_id["b1/pred"]);

  InspectionRecord b2 = pair_record("b2", "gt", "pred");
  try {
    loaded.vectors_for(b2);  // b2/pred never stored
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::missing_vector);
    CHECK(std::string(e.what()).find("b2/pred") != std::string::npos);
  }

  // a second save of the loaded object is byte-identical
  TempFile file2("bridgescore_test_embeddings2.jsonl");
  loaded.save(file2.path);
  std::ifstream f1(file.path, std::ios::binary), f2(file2.path, std::ios::binary);
  std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(c1 == c2);
  CHECK(!c1.empty());
}

TEST_CASE("evaluation: malformed embedding files are rejected") {
  TempFile file("bridgescore_test_bad_embeddings.jsonl");

  SUBCASE("missing header") {
    std::ofstream(file.path) << R"({"id": "x/gt", "vector": [1.0]})" << "\n";
    CHECK_THROWS_AS(FileEmbeddings::load(file.path), std::runtime_error);
  }
  SUBCASE("wrong dimension row") {
    std::ofstream(file.path) << R"({"dimension": 3})" << "\n"
                             << R"({"id": "x/gt", "vector": [1.0, 2.0]})" << "\n";
    try {
      FileEmbeddings::load(file.path);
      FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
      CHECK(e.kind() == EvaluationError::Kind::dimension_mismatch);
    }
  }
  SUBCASE("duplicate id") {
    std::ofstream(file.path) << R"({"dimension": 1})" << "\n"
                             << R"({"id": "x/gt", "vector": [1.0]})" << "\n"
                             << R"({"id": "x/gt", "vector": [2.0]})" << "\n";
    CHECK_THROWS_AS(FileEmbeddings::load(file.path), std::runtime_error);
  }
  SUBCASE("not json") {
    std::ofstream(file.path) << "dimension: 3\n";
    CHECK_THROWS_AS(FileEmbeddings::load(file.path), std::runtime_error);
  }
  SUBCASE("nonexistent path") {
    CHECK_THROWS_AS(FileEmbeddings::load("/nonexistent/embeddings.jsonl"), std::runtime_error);
  }
}

TEST_CASE("evaluation: model comparison flags the best column values") {
  auto make_report = [](double mean, double std_dev, double median, double min, double max) {
    SimilarityReport r;
    r.mean = mean;
    r.std_dev = std_dev;
    r.median = median;
    r.min = min;
    r.max = max;
    r.tiers = tier_distribution(std::vector<double>{mean}, results_tier_preset());
    return r;
  };

  std::vector<ModelReport> reports;
  reports.push_back({"scale-2k", make_report(0.6850, 0.0814, 0.7081, 0.21, 0.93)});
  reports.push_back({"scale-1k", make_report(0.6423, 0.0901, 0.6610, 0.18, 0.91)});
  reports.push_back({"scale-500", make_report(0.6001, 0.1100, 0.6100, 0.12, 0.90)});
  reports.push_back({"scale-250", make_report(0.5500, 0.1300, 0.5600, 0.05, 0.89)});

  auto rows = compare_models(reports);
  REQUIRE(rows.size() == 4);
  // ordered by model name
  CHECK(rows[0].model == "scale-1k");
  CHECK(rows[1].model == "scale-250");
  CHECK(rows[2].model == "scale-2k");
  CHECK(rows[3].model == "scale-500");

  // scale-2k wins every column: highest stats, lowest spread
  CHECK(rows[2].mean.best);
  CHECK(rows[2].std_dev.best);
  CHECK(rows[2].median.best);
  CHECK(rows[2].min.best);
  CHECK(rows[2].max.best);
  for (std::size_t i : {std::size_t(0), std::size_t(1), std::size_t(3)}) {
    CHECK_FALSE(rows[i].mean.best);
    CHECK_FALSE(rows[i].std_dev.best);
  }

  SUBCASE("ties flag every winner") {
    std::vector<ModelReport> tied;
    tied.push_back({"m-b", make_report(0.70, 0.10, 0.70, 0.2, 0.9)});
    tied.push_back({"m-a", make_report(0.70, 0.20, 0.65, 0.2, 0.8)});
    auto t = compare_models(tied);
    REQUIRE(t.size() == 2);
    CHECK(t[0].model == "m-a");
    CHECK(t[0].mean.best);
    CHECK(t[1].mean.best);
    CHECK(t[0].min.best);
    CHECK(t[1].min.best);
    CHECK_FALSE(t[0].std_dev.best);
    CHECK(t[1].std_dev.best);
    CHECK_FALSE(t[0].median.best);
    CHECK(t[1].median.best);
  }
  SUBCASE("a single report is best at everything") {
    auto single = compare_models({{"only", make_report(0.5, 0.1, 0.5, 0.1, 0.9)}});
    REQUIRE(single.size() == 1);
    CHECK(single[0].mean.best);
    CHECK(single[0].std_dev.best);
    CHECK(single[0].median.best);
    CHECK(single[0].min.best);
    CHECK(single[0].max.best);
  }
  SUBCASE("empty input gives an empty table") { CHECK(compare_models({}).empty()); }
}
