#include "webcp/embedding/matrix.hpp"

#include <cmath>

#include "webcp/common/error.hpp"

namespace webcp::embedding {

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids,
                                 std::vector<float> data)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)) {
  if (dim_ == 0) throw DomainError("embedding dim must be >= 1");
  if (data_.size() != ids_.size() * dim_) {
    throw DomainError("embedding payload has " + std::to_string(data_.size()) +
                      " values, expected " + std::to_string(ids_.size() * dim_));
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw DomainError("duplicate embedding id '" + ids_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DomainError("non-finite value in row '" + ids_[i / dim_] + "'");
    }
  }
}

std::optional<std::span<const float>> EmbeddingMatrix::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

std::span<const float> EmbeddingMatrix::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw MissingEmbeddingError(id);
  return row(it->second);
}

void EmbeddingBuilder::add(std::string id, std::span<const float> row) {
  if (row.size() != dim_) {
    throw DomainError("row '" + id + "' has dim " + std::to_string(row.size()) + ", expected " +
                      std::to_string(dim_));
  }
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), row.begin(), row.end());
}

void EmbeddingBuilder::add(std::string id, std::span<const double> row) {
  std::vector<float> f(row.begin(), row.end());
  add(std::move(id), std::span<const float>(f));
}

EmbeddingMatrix EmbeddingBuilder::build() && {
  return EmbeddingMatrix(dim_, std::move(ids_), std::move(data_));
}

}  // namespace webcp::embedding
