#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace webcp::conformal {

/// Threshold sentinel: every label is admitted.
inline constexpr double kAllLabels = std::numeric_limits<double>::infinity();

inline bool is_all_labels(double gamma) { return std::isinf(gamma) && gamma > 0; }

/// Nonconformity scores (1 - softmax probability), one row per example,
/// columns in `class_ids()` order.
class ScoreTable {
 public:
  ScoreTable() = default;
  ScoreTable(std::vector<std::string> class_ids, std::vector<std::string> example_ids,
             std::vector<double> scores, std::vector<double> probs = {});

  const std::vector<std::string>& class_ids() const noexcept { return class_ids_; }
  const std::vector<std::string>& example_ids() const noexcept { return example_ids_; }
  std::size_t size() const noexcept { return example_ids_.size(); }
  std::size_t num_classes() const noexcept { return class_ids_.size(); }

  std::span<const double> row(std::size_t i) const {
    return {scores_.data() + i * class_ids_.size(), class_ids_.size()};
  }
  std::span<const double> prob_row(std::size_t i) const {
    if (probs_.empty()) return {};
    return {probs_.data() + i * class_ids_.size(), class_ids_.size()};
  }

  std::optional<std::size_t> find(const std::string& example_id) const;
  /// Column of `class_id`; throws ConfigError when absent.
  std::size_t column(const std::string& class_id) const;

  /// Rows restricted/reordered to `example_ids`, columns to `class_ids`.
  /// Throws MissingEmbeddingError naming the first absent example.
  ScoreTable select(const std::vector<std::string>& example_ids,
                    const std::vector<std::string>& class_ids) const;

 private:
  std::vector<std::string> class_ids_;
  std::vector<std::string> example_ids_;
  std::vector<double> scores_;
  std::vector<double> probs_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class ThresholdRule {
  /// Strict ">" with +1 smoothing per iteration, as in the Monte Carlo procedure.
  kAsWritten,
  /// mean(count / (n + 1)) >= 1 - alpha; equals the classical order statistic
  /// in the one-hot case.
  kConservative,
};

struct MonteCarloConfig {
  std::size_t mc_samples = 100;  // M
  double alpha = 0.1;
  std::uint64_t seed = 0;
  ThresholdRule rule = ThresholdRule::kAsWritten;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct ConformalThreshold {
  std::string method;  // "webcp", "standard" or "oracle"
  double gamma = kAllLabels;
  double alpha = 0.1;
  std::size_t mc_samples = 1;
  std::uint64_t seed = 0;
  std::string rule = "as_written";
  std::size_t n_calibration = 0;
  std::vector<std::size_t> iteration_sizes;  // |C_m| per Monte Carlo iteration

  bool all_labels() const { return is_all_labels(gamma); }
};

struct PredictionSet {
  std::string example_id;
  std::vector<std::string> members;
  double gamma = kAllLabels;
};

void write_scores(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_scores(const std::filesystem::path& path);

nlohmann::json threshold_to_json(const ConformalThreshold& t);
ConformalThreshold threshold_from_json(const nlohmann::json& j);

void write_prediction_sets(const std::vector<PredictionSet>& sets,
                           const std::filesystem::path& path);
std::vector<PredictionSet> read_prediction_sets(const std::filesystem::path& path);

}  // namespace webcp::conformal
