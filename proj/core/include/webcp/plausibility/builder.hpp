#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "webcp/embedding/matrix.hpp"
#include "webcp/miner/types.hpp"
#include "webcp/plausibility/scoring.hpp"
#include "webcp/plausibility/types.hpp"

namespace webcp::plausibility {

struct PlausibilityConfig {
  double t_ctx = kDefaultTemperature;
  double t_filter = kDefaultTemperature;
  double t_content = kDefaultTemperature;
  Aggregation aggregation = Aggregation::kMax;
  PromptSet prompts = PromptSet::defaults();
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// Embedding stores consumed by the builder. Ids:
///   sentences      - example_sentences() ids (context encoder)
///   queries        - class ids, search query text (context encoder)
///   content_images - example ids (content encoder)
///   content_text   - literal prompt / negative / pseudo-label strings
struct PlausibilityStores {
  const embedding::EmbeddingMatrix& sentences;
  const embedding::EmbeddingMatrix& queries;
  const embedding::EmbeddingMatrix& content_images;
  const embedding::EmbeddingMatrix& content_text;
};

struct BuildReport {
  AmbiguousCalibrationSet set;
  std::vector<std::pair<std::string, std::string>> dropped;  // example id, reason
  std::size_t clamp_warnings = 0;
};

/// One PlausibilityVector per example with usable embeddings. Throws
/// CalibrationError if nothing survives.
BuildReport build_ambiguous_set(const miner::CorpusManifest& corpus,
                                const PlausibilityStores& stores, const PseudoLabelMap& pseudo,
                                const PlausibilityConfig& config);

}  // namespace webcp::plausibility
