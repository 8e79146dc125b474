#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "webcp/conformal/types.hpp"

namespace webcp::evaluation {

struct LabeledItem {
  std::string example_id;
  std::string true_class;
};

struct LabeledEvalSet {
  std::string split = "test";  // "calibration" or "test"
  std::vector<LabeledItem> items;
};

/// Fraction of items whose true class is in the matching set. Sets and items
/// must cover the same ids one-to-one (ConfigError otherwise).
double coverage(const std::vector<conformal::PredictionSet>& sets, const LabeledEvalSet& truth);

/// Mean set size. Throws DomainError on an empty list.
double efficiency(const std::vector<conformal::PredictionSet>& sets);

/// Lines of {"example_id": ..., "label": ...}.
LabeledEvalSet read_labels(const std::filesystem::path& path, std::string split = "test");
void write_labels(const LabeledEvalSet& set, const std::filesystem::path& path);

}  // namespace webcp::evaluation
