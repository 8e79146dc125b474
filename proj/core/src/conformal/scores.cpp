#include "webcp/conformal/scores.hpp"

#include "webcp/embedding/kernels.hpp"

namespace webcp::conformal {

ScoreTable nonconformity_scores(const embedding::EmbeddingMatrix& images,
                                const embedding::EmbeddingMatrix& labels,
                                const std::vector<std::string>& class_ids, double temperature,
                                const std::vector<std::string>& image_ids) {
  const std::vector<std::string>& ids = image_ids.empty() ? images.ids() : image_ids;
  std::vector<std::span<const float>> label_rows;
  label_rows.reserve(class_ids.size());
  for (const auto& c : class_ids) label_rows.push_back(labels.at(c));

  std::vector<double> scores, probs;
  scores.reserve(ids.size() * class_ids.size());
  probs.reserve(ids.size() * class_ids.size());
  std::vector<double> sims(class_ids.size());
  for (const auto& id : ids) {
    const auto image = images.at(id);
    for (std::size_t y = 0; y < label_rows.size(); ++y) {
      sims[y] = embedding::cosine(image, label_rows[y]);
    }
    for (double p : embedding::softmax(sims, temperature)) {
      probs.push_back(p);
      scores.push_back(1.0 - p);
    }
  }
  return ScoreTable(class_ids, ids, std::move(scores), std::move(probs));
}

}  // namespace webcp::conformal
