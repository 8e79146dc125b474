#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace webcp::embedding {

/// Immutable ID-indexed row-major float matrix.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Validates dim >= 1, |ids| * dim == |data|, unique ids and finite values.
  EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> data);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<float>& data() const noexcept { return data_; }

  std::span<const float> row(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
  }

  std::optional<std::span<const float>> find(const std::string& id) const;

  /// Throws MissingEmbeddingError.
  std::span<const float> at(const std::string& id) const;

  bool contains(const std::string& id) const { return index_.contains(id); }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Collects rows before building an EmbeddingMatrix.
class EmbeddingBuilder {
 public:
  explicit EmbeddingBuilder(std::size_t dim) : dim_(dim) {}

  void add(std::string id, std::span<const float> row);
  void add(std::string id, std::span<const double> row);

  EmbeddingMatrix build() &&;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
};

}  // namespace webcp::embedding
