#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "webcp/common/http.hpp"
#include "webcp/embedding/matrix.hpp"

namespace webcp::embedding {

enum class ItemKind { kText, kImage };

struct EmbedItem {
  std::string id;
  std::string payload;  // text, or an image path for kImage
};

/// Parses a service response (or a dump of one): {"dim": D, "vectors": {id: [...]}}.
/// Also accepts a list form [{"id": ..., "vector": [...]}]. Row order follows
/// `order` when given, else the document order.
EmbeddingMatrix parse_embedding_json(const nlohmann::json& doc,
                                     const std::vector<std::string>* order = nullptr);

nlohmann::json make_embed_request(ItemKind kind, const std::vector<EmbedItem>& items);

struct ServiceOptions {
  std::size_t batch_size = 256;
  http::RequestOptions request{std::chrono::milliseconds{60000}};
  http::RetryPolicy retry;
  /// When set, a response dimension different from this is a terminal error.
  std::optional<std::size_t> expected_dim;
};

/// POSTs batches to `endpoint` and assembles the vectors in request order.
EmbeddingMatrix fetch_embeddings(const std::string& endpoint, ItemKind kind,
                                 const std::vector<EmbedItem>& items,
                                 const ServiceOptions& options = {});

/// Deterministic feature-hashing text encoder used by the bundled fixtures in
/// place of a neural service: lowercase alphanumeric words are hashed
/// (FNV-1a 64) into `dim` signed buckets.
std::vector<float> hashing_text_embedding(std::string_view text, std::size_t dim);

}  // namespace webcp::embedding
