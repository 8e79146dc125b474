#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "webcp/conformal/types.hpp"
#include "webcp/evaluation/metrics.hpp"
#include "webcp/plausibility/types.hpp"

namespace webcp::evaluation {

enum class Method { kWebCP, kStandard, kOracle };

std::string method_name(Method m);
Method parse_method(const std::string& name);

inline const std::vector<double> kDefaultAlphas{0.1, 0.2, 0.3, 0.4, 0.5};

struct BenchmarkInputs {
  plausibility::AmbiguousCalibrationSet web;
  conformal::ScoreTable scores;  // must cover web, test and oracle ids
  LabeledEvalSet test;
  std::optional<LabeledEvalSet> oracle_pool;
};

struct BenchmarkOptions {
  std::vector<Method> methods{Method::kWebCP, Method::kStandard, Method::kOracle};
  std::vector<double> alphas = kDefaultAlphas;
  std::size_t mc_samples = 100;
  std::uint64_t seed = 0;
  conformal::ThresholdRule rule = conformal::ThresholdRule::kAsWritten;
  std::size_t threads = 0;
};

struct ReportRow {
  std::string method;
  double alpha = 0.0;
  double calib_coverage = 0.0;
  double calib_efficiency = 0.0;
  double test_coverage = 0.0;
  double test_efficiency = 0.0;
  double delta_cov = 0.0;  // test_coverage - (1 - alpha)
  double gamma = conformal::kAllLabels;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // method order of the options, then alpha

  const ReportRow* find(const std::string& method, double alpha) const;
};

/// Oracle calibration draws as many labelled target samples as the web set
/// holds (seeded subsample of the pool).
EvalReport run_benchmark(const BenchmarkInputs& inputs, const BenchmarkOptions& options);

/// Fixed six-decimal formatting so equal reports are byte-identical.
std::string report_to_csv(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace webcp::evaluation
