#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace webcp::io {

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::string_view bytes);

nlohmann::json read_json(const std::filesystem::path& path);

/// Pretty-printed with sorted keys and a trailing newline; byte-stable for equal values.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

}  // namespace webcp::io
