#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "webcp/embedding/matrix.hpp"
#include "webcp/miner/types.hpp"
#include "webcp/plausibility/types.hpp"

namespace webcp::plausibility {

using Vec = std::span<const float>;

inline constexpr double kDefaultTemperature = 0.07;

enum class Aggregation { kMax, kMean };

/// Per class: aggregate sentence/query cosine, then softmax over classes at
/// `temperature`. Throws DomainError when `sentences` is empty.
std::vector<double> context_scores(std::span<const Vec> sentences, std::span<const Vec> queries,
                                   double temperature, Aggregation aggregation = Aggregation::kMax);

/// Probability of the negative label among {invalid prompts, negative label}.
double content_filter(Vec image, std::span<const Vec> invalid_prompts, Vec negative,
                      double temperature);

/// Per class: first component of softmax([cos(image, pseudo), cos(image, negative)]).
std::vector<double> content_scores(Vec image, std::span<const Vec> pseudo_labels, Vec negative,
                                   double temperature);

/// lambda_y = h_y * c_y * s_neg, junk = 1 - sum lambda clamped into [0, 1].
PlausibilityVector combine(std::span<const double> context, std::span<const double> content,
                           double s_neg);

/// Embedding ids for the sentences of an example, with their text:
/// "<id>/alt", "<id>/pre/<k>", "<id>/post/<k>".
std::vector<std::pair<std::string, std::string>> example_sentences(const miner::MinedExample& ex);

}  // namespace webcp::plausibility
