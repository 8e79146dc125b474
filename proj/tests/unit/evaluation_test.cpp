#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"
#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/philox.hpp"
#include "webcp/conformal/calibration.hpp"
#include "webcp/conformal/scores.hpp"
#include "webcp/evaluation/benchmark.hpp"
#include "webcp/evaluation/synthetic.hpp"

namespace {

using namespace webcp;
using namespace webcp::evaluation;
using conformal::PredictionSet;

LabeledEvalSet truth(std::vector<std::pair<std::string, std::string>> items) {
  LabeledEvalSet t;
  for (auto& [id, cls] : items) t.items.push_back({id, cls});
  return t;
}

TEST(Metrics, CoverageExamples) {
  const auto t = truth({{"1", "a"}, {"2", "b"}, {"3", "a"}, {"4", "c"}});
  std::vector<PredictionSet> full, empty, three;
  for (const auto& item : t.items) {
    full.push_back({item.example_id, {"a", "b", "c"}, 1.0});
    empty.push_back({item.example_id, {}, 0.0});
    three.push_back({item.example_id, {item.example_id == "4" ? "a" : item.true_class}, 0.5});
  }
  EXPECT_EQ(coverage(full, t), 1.0);
  EXPECT_EQ(coverage(empty, t), 0.0);
  EXPECT_EQ(coverage(three, t), 0.75);
  std::reverse(three.begin(), three.end());
  EXPECT_EQ(coverage(three, t), 0.75);
}

TEST(Metrics, EfficiencyExamples) {
  EXPECT_EQ(efficiency({{"1", {"a"}, 0}, {"2", {"b"}, 0}}), 1.0);
  EXPECT_EQ(efficiency({{"1", {"a"}, 0}, {"2", {"a", "b", "c"}, 0}}), 2.0);
  std::vector<std::string> all;
  for (int y = 0; y < 114; ++y) all.push_back("skin" + std::to_string(y));
  std::vector<PredictionSet> sets(37, PredictionSet{"", all, conformal::kAllLabels});
  EXPECT_EQ(efficiency(sets), 114.0);
  EXPECT_THROW(efficiency({}), DomainError);
}

TEST(Metrics, IdsMustAlign) {
  const auto t = truth({{"1", "a"}, {"2", "b"}});
  EXPECT_THROW(coverage({{"1", {"a"}, 0}}, t), ConfigError);
  EXPECT_THROW(coverage({{"1", {"a"}, 0}, {"3", {"b"}, 0}}, t), ConfigError);
  EXPECT_THROW(coverage({{"1", {"a"}, 0}, {"1", {"b"}, 0}}, t), ConfigError);
  EXPECT_THROW(coverage({}, LabeledEvalSet{}), DomainError);
}

TEST(Metrics, MonotoneInGamma) {
  RandomStream rng(1, 0);
  const std::vector<std::string> classes{"a", "b", "c", "d"};
  std::vector<std::string> ids;
  std::vector<double> flat;
  LabeledEvalSet t;
  for (int i = 0; i < 300; ++i) {
    ids.push_back("x" + std::to_string(i));
    t.items.push_back({ids.back(), classes[rng.below(4)]});
    for (int y = 0; y < 4; ++y) flat.push_back(rng.uniform());
  }
  const conformal::ScoreTable table(classes, ids, flat);
  double cov = 0, eff = 0;
  for (double g = 0; g <= 1.0; g += 0.05) {
    const auto sets = conformal::predict_sets(table, g);
    EXPECT_GE(coverage(sets, t), cov);
    EXPECT_GE(efficiency(sets), eff);
    cov = coverage(sets, t);
    eff = efficiency(sets);
  }
}

TEST(Metrics, LabelsRoundTrip) {
  webcp::testing::TempDir dir;
  const auto t = truth({{"1", "a"}, {"2", "b"}});
  write_labels(t, dir / "l.jsonl");
  const auto back = read_labels(dir / "l.jsonl", "calibration");
  EXPECT_EQ(back.split, "calibration");
  ASSERT_EQ(back.items.size(), 2u);
  EXPECT_EQ(back.items[1].true_class, "b");
}

TEST(Synthetic, OneHotWithoutNoise) {
  SyntheticTask task;
  task.n_calib = 200;
  task.n_test = 50;
  task.seed = 3;
  const auto d = generate_synthetic_task(task);
  ASSERT_EQ(d.web.entries.size(), 200u);
  for (std::size_t i = 0; i < d.web.entries.size(); ++i) {
    const auto& e = d.web.entries[i];
    EXPECT_EQ(e.lambda_junk, 0.0);
    const auto q = std::find(d.class_ids.begin(), d.class_ids.end(), e.class_query);
    for (std::size_t y = 0; y < e.lambda.size(); ++y) {
      EXPECT_EQ(e.lambda[y], d.class_ids.begin() + static_cast<std::ptrdiff_t>(y) == q ? 1.0 : 0.0);
    }
    EXPECT_EQ(d.web_truth.items[i].true_class, e.class_query);
  }
  EXPECT_EQ(d.test.items.size(), 50u);
  EXPECT_EQ(d.oracle_pool.items.size(), 200u);
  EXPECT_EQ(d.labels.size(), 10u);
  for (std::size_t y = 0; y < d.labels.size(); ++y) {
    double norm = 0;
    for (float x : d.labels.row(y)) norm += double(x) * x;
    EXPECT_NEAR(norm, 1.0, 1e-6);
  }
}

TEST(Synthetic, NoisyPlausibilitiesAreValidAndInformative) {
  for (auto mode : {LabelNoise::kClassifierTop, LabelNoise::kNearestWrong}) {
    SyntheticTask task;
    task.label_noise = 0.2;
    task.label_noise_mode = mode;
    task.junk_rate = 0.1;
    task.n_calib = 2000;
    task.n_test = 10;
    task.seed = 4;
    const auto d = generate_synthetic_task(task);
    EXPECT_NO_THROW(d.web.validate());
    // The expected junk mass tracks the junk rate; true classes get most of the mass.
    double junk = 0, true_mass = 0;
    std::size_t wrong = 0, junk_items = 0;
    for (std::size_t i = 0; i < d.web.entries.size(); ++i) {
      const auto& e = d.web.entries[i];
      const auto& t = d.web_truth.items[i].true_class;
      junk += e.lambda_junk;
      if (t.empty()) {
        ++junk_items;
        continue;
      }
      wrong += t != e.class_query;
      const auto y = std::find(d.class_ids.begin(), d.class_ids.end(), t) - d.class_ids.begin();
      true_mass += e.lambda[static_cast<std::size_t>(y)];
    }
    const auto n = static_cast<double>(d.web.entries.size());
    const double wrong_rate = wrong / (n - junk_items);
    EXPECT_NEAR(junk / n, 0.1, 0.02);
    EXPECT_NEAR(junk_items / n, 0.1, 0.02);
    EXPECT_GT(true_mass / (n - junk_items), 0.6);
    if (mode == LabelNoise::kNearestWrong) {
      EXPECT_NEAR(wrong_rate, 0.2, 0.03);
    } else {
      // Replacement by the top-ranked class keeps the label when the classifier is right.
      EXPECT_GT(wrong_rate, 0.03);
      EXPECT_LT(wrong_rate, 0.17);
    }
  }
}

TEST(Synthetic, DeterministicAndSeedSensitive) {
  SyntheticTask task;
  task.label_noise = 0.2;
  task.n_calib = 50;
  task.n_test = 50;
  task.seed = 11;
  const auto a = generate_synthetic_task(task);
  const auto b = generate_synthetic_task(task);
  EXPECT_EQ(a.images.data(), b.images.data());
  EXPECT_EQ(a.web.entries[7].lambda, b.web.entries[7].lambda);
  task.seed = 12;
  EXPECT_NE(generate_synthetic_task(task).images.data(), a.images.data());
}

TEST(Synthetic, Validation) {
  SyntheticTask task;
  task.label_noise = 1.5;
  EXPECT_THROW(task.validate(), ConfigError);
  task = {};
  task.n_test = 0;
  EXPECT_THROW(task.validate(), ConfigError);
  task = {};
  task.class_noise_scale = {1.0};
  EXPECT_THROW(task.validate(), ConfigError);
  task = {};
  task.label_noise_mode = LabelNoise::kNearestWrong;
  nlohmann::json j = task;
  EXPECT_EQ(j.get<SyntheticTask>().n_calib, task.n_calib);
  EXPECT_EQ(j.get<SyntheticTask>().label_noise_mode, LabelNoise::kNearestWrong);
  j["label_noise_mode"] = "sometimes";
  EXPECT_THROW(j.get<SyntheticTask>(), ConfigError);
}

BenchmarkInputs inputs_for(const SyntheticData& d, const SyntheticTask& task) {
  BenchmarkInputs in;
  in.web = d.web;
  in.scores = conformal::nonconformity_scores(d.images, d.labels, d.class_ids,
                                              task.classifier_temperature);
  in.test = d.test;
  in.oracle_pool = d.oracle_pool;
  return in;
}

TEST(Benchmark, OracleCoverageOnExchangeableData) {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticTask task;
    task.seed = seed;
    const auto d = generate_synthetic_task(task);
    BenchmarkOptions opt;
    opt.methods = {Method::kOracle};
    opt.alphas = {0.2};
    opt.seed = seed;
    total += run_benchmark(inputs_for(d, task), opt).rows.at(0).test_coverage;
  }
  const double mean = total / 20;
  EXPECT_GE(mean, 0.78);
  EXPECT_LE(mean, 0.84);
}

TEST(Benchmark, ReportShapeAndReproducibility) {
  SyntheticTask task;
  task.label_noise = 0.2;
  task.junk_rate = 0.1;
  task.n_calib = 300;
  task.n_test = 500;
  task.seed = 5;
  const auto d = generate_synthetic_task(task);
  BenchmarkOptions opt;
  opt.mc_samples = 20;
  opt.seed = 5;
  opt.threads = 4;
  const auto a = run_benchmark(inputs_for(d, task), opt);
  opt.threads = 1;
  const auto b = run_benchmark(inputs_for(d, task), opt);
  ASSERT_EQ(a.rows.size(), 15u);
  EXPECT_EQ(report_to_csv(a), report_to_csv(b));
  EXPECT_EQ(report_to_json(a), report_to_json(b));
  const std::string csv = report_to_csv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "method,alpha,calib_coverage,calib_efficiency,test_coverage,test_efficiency,delta_cov");
  for (const auto& r : a.rows) {
    EXPECT_GE(r.test_coverage, 0.0);
    EXPECT_LE(r.test_coverage, 1.0);
    EXPECT_GE(r.test_efficiency, 0.0);
    EXPECT_LE(r.test_efficiency, 10.0);
    EXPECT_NEAR(r.delta_cov, r.test_coverage - (1.0 - r.alpha), 1e-12);
  }
  ASSERT_NE(a.find("webcp", 0.3), nullptr);
  EXPECT_EQ(a.find("webcp", 0.35), nullptr);
  // Coverage rises as alpha falls.
  EXPECT_GE(a.find("standard", 0.1)->test_coverage, a.find("standard", 0.5)->test_coverage);
}

TEST(Benchmark, OracleNeedsPool) {
  SyntheticTask task;
  task.n_calib = 20;
  task.n_test = 20;
  const auto d = generate_synthetic_task(task);
  auto in = inputs_for(d, task);
  in.oracle_pool.reset();
  BenchmarkOptions opt;
  opt.methods = {Method::kOracle};
  EXPECT_THROW(run_benchmark(in, opt), ConfigError);
  EXPECT_EQ(parse_method("standard"), Method::kStandard);
  EXPECT_THROW(parse_method("bogus"), ConfigError);
}

TEST(Synthetic, TaskDirectoryIsComplete) {
  SyntheticTask task;
  task.n_calib = 30;
  task.n_test = 30;
  const auto d = generate_synthetic_task(task);
  webcp::testing::TempDir dir;
  write_synthetic_task(d, task, dir.path());
  for (const char* f : {"classifier_images.wcpe", "classifier_labels.wcpe", "plausibilities.jsonl",
                        "scores.jsonl", "test_labels.jsonl", "oracle_labels.jsonl",
                        "web_truth.jsonl", "task.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(conformal::read_scores(dir / "scores.jsonl").size(), 30u + 30u + 30u);
}

}  // namespace
