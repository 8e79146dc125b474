#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "webcp/embedding/matrix.hpp"

namespace webcp::embedding {

/// .wcpe layout (all integers and floats little-endian):
///   "WCPEMB01" | u32 dim | u64 count | count x (u16 len, id bytes) | count*dim f32
inline constexpr std::string_view kWcpeMagic = "WCPEMB01";

std::string encode_wcpe(const EmbeddingMatrix& m);

/// Throws FormatError carrying the byte offset of the first bad field.
EmbeddingMatrix decode_wcpe(std::string_view bytes);

void store_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace webcp::embedding
