#include "webcp/embedding/service.hpp"

#include <cctype>
#include <set>

#include "webcp/common/error.hpp"

namespace webcp::embedding {
namespace {

std::vector<float> to_row(const nlohmann::json& values, const std::string& id) {
  if (!values.is_array()) throw FormatError("vector for '" + id + "' is not an array", 0);
  std::vector<float> row;
  row.reserve(values.size());
  for (const auto& v : values) {
    if (!v.is_number()) throw FormatError("non-numeric value in vector '" + id + "'", 0);
    row.push_back(v.get<float>());
  }
  return row;
}

}  // namespace

EmbeddingMatrix parse_embedding_json(const nlohmann::json& doc,
                                     const std::vector<std::string>* order) {
  std::vector<std::pair<std::string, std::vector<float>>> rows;
  std::size_t dim = 0;
  if (doc.is_object() && doc.contains("vectors")) {
    dim = doc.value("dim", std::size_t{0});
    for (const auto& [id, values] : doc["vectors"].items()) rows.emplace_back(id, to_row(values, id));
  } else if (doc.is_array()) {
    for (const auto& item : doc) {
      const std::string id = item.at("id").get<std::string>();
      rows.emplace_back(id, to_row(item.at("vector"), id));
    }
  } else {
    throw FormatError("expected {\"dim\", \"vectors\"} or [{\"id\", \"vector\"}]", 0);
  }
  if (dim == 0 && !rows.empty()) dim = rows.front().second.size();
  if (dim == 0) throw FormatError("cannot infer embedding dim from an empty document", 0);

  if (order) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < rows.size(); ++i) pos.emplace(rows[i].first, i);
    EmbeddingBuilder b(dim);
    for (const auto& id : *order) {
      const auto it = pos.find(id);
      if (it == pos.end()) throw MissingEmbeddingError(id);
      b.add(id, std::span<const float>(rows[it->second].second));
    }
    return std::move(b).build();
  }
  EmbeddingBuilder b(dim);
  for (auto& [id, row] : rows) b.add(std::move(id), std::span<const float>(row));
  return std::move(b).build();
}

nlohmann::json make_embed_request(ItemKind kind, const std::vector<EmbedItem>& items) {
  nlohmann::json req;
  req["kind"] = kind == ItemKind::kText ? "text" : "image";
  req["items"] = nlohmann::json::array();
  for (const auto& item : items) req["items"].push_back({{"id", item.id}, {"payload", item.payload}});
  return req;
}

EmbeddingMatrix fetch_embeddings(const std::string& endpoint, ItemKind kind,
                                 const std::vector<EmbedItem>& items,
                                 const ServiceOptions& options) {
  std::set<std::string> unique;
  for (const auto& item : items) {
    if (!unique.insert(item.id).second) throw DomainError("duplicate request id '" + item.id + "'");
  }
  std::optional<std::size_t> dim = options.expected_dim;
  std::vector<std::string> ids;
  std::vector<float> data;
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  for (std::size_t start = 0; start < items.size(); start += batch) {
    const std::vector<EmbedItem> chunk(items.begin() + static_cast<std::ptrdiff_t>(start),
                                       items.begin() + static_cast<std::ptrdiff_t>(
                                                           std::min(items.size(), start + batch)));
    const std::string body = make_embed_request(kind, chunk).dump();
    const http::Response r = http::with_retries(options.retry, [&] {
      http::Response resp = http::post_json(endpoint, body, options.request);
      if (resp.status >= 500) {
        throw TransportError("embedding service returned " + std::to_string(resp.status), true);
      }
      return resp;
    });
    if (r.status != 200) {
      throw TransportError("embedding service returned HTTP " + std::to_string(r.status), false);
    }
    const auto doc = nlohmann::json::parse(r.body, nullptr, false);
    if (doc.is_discarded()) throw FormatError("embedding service returned invalid JSON", 0);
    std::vector<std::string> order;
    for (const auto& item : chunk) order.push_back(item.id);
    const EmbeddingMatrix part = parse_embedding_json(doc, &order);
    if (dim && *dim != part.dim()) {
      throw TransportError("embedding service dim " + std::to_string(part.dim()) +
                               " disagrees with expected " + std::to_string(*dim),
                           false);
    }
    dim = part.dim();
    ids.insert(ids.end(), part.ids().begin(), part.ids().end());
    data.insert(data.end(), part.data().begin(), part.data().end());
  }
  if (!dim) throw DomainError("fetch_embeddings: nothing requested and no expected dim");
  return EmbeddingMatrix(*dim, std::move(ids), std::move(data));
}

std::vector<float> hashing_text_embedding(std::string_view text, std::size_t dim) {
  if (dim == 0) throw DomainError("hashing embedding dim must be >= 1");
  std::vector<float> v(dim, 0.0f);
  auto add_token = [&](std::string_view token) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : token) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    v[h % dim] += (h >> 63) ? -1.0f : 1.0f;
  };
  std::string token;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else if (!token.empty()) {
      add_token(token);
      token.clear();
    }
  }
  if (!token.empty()) add_token(token);
  bool zero = true;
  for (float x : v) zero = zero && x == 0.0f;
  if (zero) v[0] = 1.0f;
  return v;
}

}  // namespace webcp::embedding
