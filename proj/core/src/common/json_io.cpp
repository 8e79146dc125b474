#include "webcp/common/json_io.hpp"

#include <fstream>
#include <sstream>

#include "webcp/common/error.hpp"

namespace webcp::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open " + path.string(), false);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TransportError("cannot write " + tmp.string(), false);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw TransportError("short write to " + tmp.string(), false);
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_file(path, value.dump(2) + "\n");
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<nlohmann::json> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        rows.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what(), pos + e.byte);
      }
    }
    pos = end + 1;
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace webcp::io
