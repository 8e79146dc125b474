#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "webcp/embedding/matrix.hpp"
#include "webcp/evaluation/metrics.hpp"
#include "webcp/plausibility/types.hpp"

namespace webcp::evaluation {

/// Desk-scale stand-in for a web calibration corpus and a target test set.
///
/// Test and oracle images of class t are c_t + s_t * z / sqrt(dim) around
/// unit-norm centers c_t. The web split draws the same population, then
///  - label noise: with probability `label_noise` the page label is replaced.
///    kClassifierTop uses the class the classifier ranks first, which may be
///    the true class; kNearestWrong uses the highest-ranked wrong class, so
///    every replacement is an error;
///  - junk: with probability `junk_rate` the item is a prototypical
///    non-photographic rendering of the queried class,
///    junk_center_scale * c_q + junk_noise_scale * z / sqrt(dim).
/// Plausibilities are the exact posteriors of (true class, junk) given the
/// image and its observed label under this generator; they are one-hot on the
/// queried class when both rates are zero.
enum class LabelNoise { kClassifierTop, kNearestWrong };

std::string label_noise_name(LabelNoise mode);
LabelNoise parse_label_noise(const std::string& name);

struct SyntheticTask {
  std::size_t num_classes = 10;
  std::size_t dim = 64;
  double noise_scale = 4.0;
  std::vector<double> class_noise_scale;  // per class; empty means noise_scale
  double label_noise = 0.0;
  LabelNoise label_noise_mode = LabelNoise::kClassifierTop;
  double junk_rate = 0.0;
  double junk_center_scale = 1.0;
  double junk_noise_scale = 1.0;
  double classifier_temperature = 0.1;
  std::size_t n_calib = 500;
  std::size_t n_test = 2000;
  std::size_t n_oracle = 0;  // 0: n_calib
  std::uint64_t seed = 0;

  void validate() const;
  double class_noise(std::size_t y) const {
    return class_noise_scale.empty() ? noise_scale : class_noise_scale[y];
  }
};

void to_json(nlohmann::json& j, const SyntheticTask& t);
void from_json(const nlohmann::json& j, SyntheticTask& t);

struct SyntheticData {
  std::vector<std::string> class_ids;
  /// Rows "web-NNNNN", "test-NNNNN", "oracle-NNNNN".
  embedding::EmbeddingMatrix images;
  /// Class ids -> class centers.
  embedding::EmbeddingMatrix labels;
  plausibility::AmbiguousCalibrationSet web;
  /// Hidden ground truth of the web split; junk items carry an empty class.
  LabeledEvalSet web_truth;
  LabeledEvalSet test;
  LabeledEvalSet oracle_pool;
};

SyntheticData generate_synthetic_task(const SyntheticTask& task);

/// Writes a task directory the pipeline can consume:
///   classifier_images.wcpe, classifier_labels.wcpe, plausibilities.jsonl,
///   scores.jsonl, test_labels.jsonl, oracle_labels.jsonl, web_truth.jsonl, task.json.
void write_synthetic_task(const SyntheticData& data, const SyntheticTask& task,
                          const std::filesystem::path& dir);

}  // namespace webcp::evaluation
