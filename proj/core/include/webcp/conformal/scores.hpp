#pragma once

#include <string>
#include <vector>

#include "webcp/conformal/types.hpp"
#include "webcp/embedding/matrix.hpp"

namespace webcp::conformal {

/// For each image: p = softmax over classes of cos(image, label) at
/// `temperature`; score(y) = 1 - p(y). `image_ids` empty means every row of
/// `images`. Missing ids raise MissingEmbeddingError.
ScoreTable nonconformity_scores(const embedding::EmbeddingMatrix& images,
                                const embedding::EmbeddingMatrix& labels,
                                const std::vector<std::string>& class_ids, double temperature,
                                const std::vector<std::string>& image_ids = {});

}  // namespace webcp::conformal
