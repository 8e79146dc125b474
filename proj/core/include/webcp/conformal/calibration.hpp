#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "webcp/conformal/types.hpp"
#include "webcp/plausibility/types.hpp"

namespace webcp::conformal {

struct SampledLabel {
  std::size_t entry = 0;  // index into the ambiguous set
  std::size_t label = 0;  // class column
  double score = 0.0;
};

/// One Monte Carlo draw: each entry is kept with probability 1 - junk and,
/// if kept, labelled from lambda renormalised on the keep event. Iteration
/// `iteration` reads the Philox substream (seed, iteration), so any subset of
/// iterations can be reproduced in isolation.
std::vector<SampledLabel> sample_calibration_iteration(
    const plausibility::AmbiguousCalibrationSet& set, const ScoreTable& aligned_scores,
    std::uint64_t seed, std::uint64_t iteration);

/// Monte Carlo conformal threshold over ambiguous labels: the smallest
/// sampled score gamma with
///   (1/M) sum_m (#{score <= gamma in C_m} + 1) / (|C_m| + 1) > 1 - alpha,
/// or kAllLabels when no sampled score qualifies. `aligned_scores` rows must
/// follow the set's entry order and columns its class order (see
/// align_scores). Throws CalibrationError if every iteration is empty.
ConformalThreshold mc_threshold(const plausibility::AmbiguousCalibrationSet& set,
                                const ScoreTable& aligned_scores, const MonteCarloConfig& config);

/// Threshold search on pre-sampled iterations; exposed for tests and benchmarks.
double mc_threshold_from_samples(std::span<const std::vector<double>> sorted_iterations,
                                 double alpha, ThresholdRule rule);

/// Classical split-conformal quantile: the ceil((n+1)(1-alpha))-th smallest
/// score, or kAllLabels when that rank exceeds n.
double standard_threshold(std::span<const double> scores, double alpha);

/// Rows in entry order, columns in class order of `set`.
ScoreTable align_scores(const plausibility::AmbiguousCalibrationSet& set, const ScoreTable& table);

/// Score of each entry under its queried class (the web-label baseline).
std::vector<double> query_label_scores(const plausibility::AmbiguousCalibrationSet& set,
                                       const ScoreTable& aligned_scores);

/// Classes with score <= gamma.
PredictionSet predict_set(const std::string& example_id, std::span<const double> scores,
                          const std::vector<std::string>& class_ids, double gamma);

std::vector<PredictionSet> predict_sets(const ScoreTable& table, double gamma);

}  // namespace webcp::conformal
