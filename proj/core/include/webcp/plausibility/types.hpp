#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace webcp::plausibility {

struct PromptSet {
  std::vector<std::string> invalid_form_prompts;
  std::string negative_label = "an image";

  /// Two invalid-form prompts from the method description plus two
  /// close variants; all of it is meant to be overridden per task.
  static PromptSet defaults();

  /// negative_label non-empty; prompts distinct, non-empty and different from
  /// the negative label. An empty prompt list is allowed.
  void validate() const;
};

/// Class id -> simplified, visually generic label.
using PseudoLabelMap = std::map<std::string, std::string>;

/// Plausibilities for one mined example. All per-class vectors are aligned
/// with the owning set's class order.
struct PlausibilityVector {
  std::string example_id;
  std::string class_query;  // class the example was mined for
  std::vector<double> lambda;
  double lambda_junk = 0.0;
  // Audit components.
  std::vector<double> context;  // c
  std::vector<double> content;  // h
  double s_neg = 0.0;
  /// |unclamped junk - clamped junk|; zero unless float drift pushed the
  /// complement outside [0, 1]. Not serialised.
  double junk_clamp = 0.0;
};

struct AmbiguousCalibrationSet {
  std::vector<std::string> class_ids;
  std::vector<PlausibilityVector> entries;  // sorted by example_id

  /// Sum-to-one within 1e-9, entries in [0, 1], vector sizes match.
  void validate() const;
};

nlohmann::json to_json_line(const PlausibilityVector& v, const std::vector<std::string>& class_ids);

PseudoLabelMap load_pseudo_map(const std::filesystem::path& path);

void write_plausibilities(const AmbiguousCalibrationSet& set, const std::filesystem::path& path);

/// Class order is taken from `class_ids` when non-empty, else from the keys
/// of the first line (sorted).
AmbiguousCalibrationSet read_plausibilities(const std::filesystem::path& path,
                                            std::vector<std::string> class_ids = {});

}  // namespace webcp::plausibility
