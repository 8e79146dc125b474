#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace webcp {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws TransportError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace webcp
