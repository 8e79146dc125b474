#include "webcp/evaluation/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "webcp/common/error.hpp"
#include "webcp/common/log.hpp"
#include "webcp/common/philox.hpp"
#include "webcp/conformal/calibration.hpp"

namespace webcp::evaluation {

namespace {

constexpr std::uint64_t kOracleSubsampleStream = 0x6f7261636c65ULL;

std::vector<std::string> ids_of(const LabeledEvalSet& set) {
  std::vector<std::string> ids;
  ids.reserve(set.items.size());
  for (const auto& item : set.items) ids.push_back(item.example_id);
  return ids;
}

double mean_set_size(const conformal::ScoreTable& table, double gamma) {
  if (table.size() == 0) return 0.0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (double s : table.row(i)) total += s <= gamma ? 1 : 0;
  }
  return static_cast<double>(total) / static_cast<double>(table.size());
}

// Plausibility-weighted share of non-junk mass that the threshold admits.
double weighted_coverage(const plausibility::AmbiguousCalibrationSet& set,
                         const conformal::ScoreTable& aligned, double gamma) {
  double hit = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto row = aligned.row(i);
    const auto& lambda = set.entries[i].lambda;
    for (std::size_t y = 0; y < lambda.size(); ++y) {
      mass += lambda[y];
      if (row[y] <= gamma) hit += lambda[y];
    }
  }
  return mass > 0.0 ? hit / mass : 0.0;
}

double fraction_at_most(const std::vector<double>& scores, double gamma) {
  if (scores.empty()) return 0.0;
  std::size_t n = 0;
  for (double s : scores) n += s <= gamma ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(scores.size());
}

LabeledEvalSet subsample(const LabeledEvalSet& pool, std::size_t n, std::uint64_t seed) {
  LabeledEvalSet out;
  out.split = pool.split;
  if (n >= pool.items.size()) {
    if (n > pool.items.size()) {
      log::warn("evaluate", "oracle_pool_small",
                {{"pool", pool.items.size()}, {"requested", n}});
    }
    out.items = pool.items;
    return out;
  }
  std::vector<std::size_t> idx(pool.items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RandomStream rng(seed, kOracleSubsampleStream);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i : idx) out.items.push_back(pool.items[i]);
  return out;
}

std::string fmt(double v) {
  if (conformal::is_all_labels(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kWebCP:
      return "webcp";
    case Method::kStandard:
      return "standard";
    case Method::kOracle:
      return "oracle";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "webcp") return Method::kWebCP;
  if (name == "standard") return Method::kStandard;
  if (name == "oracle") return Method::kOracle;
  throw ConfigError("unknown method '" + name + "' (expected webcp, standard or oracle)");
}

const ReportRow* EvalReport::find(const std::string& method, double alpha) const {
  for (const auto& r : rows) {
    if (r.method == method && std::abs(r.alpha - alpha) < 1e-12) return &r;
  }
  return nullptr;
}

EvalReport run_benchmark(const BenchmarkInputs& in, const BenchmarkOptions& options) {
  if (options.alphas.empty()) throw ConfigError("benchmark: empty alpha grid");
  for (double a : options.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("benchmark: alpha must be in (0, 1)");
  }
  if (in.web.entries.empty()) throw CalibrationError("benchmark: empty calibration set");
  if (in.test.items.empty()) throw ConfigError("benchmark: empty test set");

  const auto& classes = in.web.class_ids;
  const auto aligned = conformal::align_scores(in.web, in.scores);
  const auto test_table = in.scores.select(ids_of(in.test), classes);

  std::optional<LabeledEvalSet> oracle_calib;
  std::optional<conformal::ScoreTable> oracle_table;
  std::vector<double> oracle_scores;
  for (Method m : options.methods) {
    if (m != Method::kOracle || oracle_calib) continue;
    if (!in.oracle_pool || in.oracle_pool->items.empty()) {
      throw ConfigError("benchmark: oracle method requires a labelled oracle pool");
    }
    oracle_calib = subsample(*in.oracle_pool, in.web.entries.size(), options.seed);
    oracle_table = in.scores.select(ids_of(*oracle_calib), classes);
    for (std::size_t i = 0; i < oracle_table->size(); ++i) {
      oracle_scores.push_back(oracle_table->row(i)[oracle_table->column(oracle_calib->items[i].true_class)]);
    }
  }
  const auto query_scores = conformal::query_label_scores(in.web, aligned);

  EvalReport report;
  for (Method m : options.methods) {
    for (double alpha : options.alphas) {
      ReportRow row;
      row.method = method_name(m);
      row.alpha = alpha;
      switch (m) {
        case Method::kWebCP: {
          conformal::MonteCarloConfig cfg;
          cfg.alpha = alpha;
          cfg.mc_samples = options.mc_samples;
          cfg.seed = options.seed;
          cfg.rule = options.rule;
          cfg.threads = options.threads;
          row.gamma = conformal::mc_threshold(in.web, aligned, cfg).gamma;
          row.calib_coverage = weighted_coverage(in.web, aligned, row.gamma);
          row.calib_efficiency = mean_set_size(aligned, row.gamma);
          break;
        }
        case Method::kStandard:
          row.gamma = conformal::standard_threshold(query_scores, alpha);
          row.calib_coverage = fraction_at_most(query_scores, row.gamma);
          row.calib_efficiency = mean_set_size(aligned, row.gamma);
          break;
        case Method::kOracle:
          row.gamma = conformal::standard_threshold(oracle_scores, alpha);
          row.calib_coverage = fraction_at_most(oracle_scores, row.gamma);
          row.calib_efficiency = mean_set_size(*oracle_table, row.gamma);
          break;
      }
      const auto sets = conformal::predict_sets(test_table, row.gamma);
      row.test_coverage = coverage(sets, in.test);
      row.test_efficiency = efficiency(sets);
      row.delta_cov = row.test_coverage - (1.0 - alpha);
      log::info("evaluate", "cell",
                {{"method", row.method},
                 {"alpha", alpha},
                 {"test_coverage", row.test_coverage},
                 {"test_efficiency", row.test_efficiency}});
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "method,alpha,calib_coverage,calib_efficiency,test_coverage,test_efficiency,delta_cov\n";
  for (const auto& r : report.rows) {
    out << r.method << ',' << fmt(r.alpha) << ',' << fmt(r.calib_coverage) << ','
        << fmt(r.calib_efficiency) << ',' << fmt(r.test_coverage) << ',' << fmt(r.test_efficiency)
        << ',' << fmt(r.delta_cov) << '\n';
  }
  return out.str();
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"method", r.method},
                        {"alpha", r.alpha},
                        {"calib_coverage", r.calib_coverage},
                        {"calib_efficiency", r.calib_efficiency},
                        {"test_coverage", r.test_coverage},
                        {"test_efficiency", r.test_efficiency},
                        {"delta_cov", r.delta_cov}};
    if (conformal::is_all_labels(r.gamma)) {
      j["gamma"] = nullptr;
      j["all_labels"] = true;
    } else {
      j["gamma"] = r.gamma;
    }
    rows.push_back(std::move(j));
  }
  return {{"rows", rows}};
}

}  // namespace webcp::evaluation
