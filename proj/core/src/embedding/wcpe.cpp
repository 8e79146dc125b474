#include "webcp/embedding/wcpe.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"

namespace webcp::embedding {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "IEEE-754 floats required");

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  template <typename T>
  T get_le(const char* field) {
    need(sizeof(T), field);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* field) {
    need(n, field);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* field) const {
    if (remaining() < n) {
      throw FormatError(std::string("truncated .wcpe file while reading ") + field, pos_);
    }
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_wcpe(const EmbeddingMatrix& m) {
  std::string out;
  out.reserve(20 + m.size() * (2 + 16) + m.data().size() * 4);
  out.append(kWcpeMagic);
  if (m.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("embedding dim does not fit in u32");
  }
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  put_le<std::uint64_t>(out, m.size());
  for (const auto& id : m.ids()) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw DomainError("embedding id longer than 65535 bytes");
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.append(id);
  }
  for (float f : m.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

EmbeddingMatrix decode_wcpe(std::string_view bytes) {
  Reader r(bytes);
  if (r.remaining() < kWcpeMagic.size() || bytes.substr(0, kWcpeMagic.size()) != kWcpeMagic) {
    throw FormatError("bad magic/version, expected WCPEMB01", 0);
  }
  r.take(kWcpeMagic.size(), "magic");
  const std::uint64_t dim_offset = r.offset();
  const auto dim = r.get_le<std::uint32_t>("dim");
  if (dim == 0) throw FormatError("dim must be >= 1", dim_offset);
  const auto count = r.get_le<std::uint64_t>("count");

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> seen;
  // Each id costs at least two bytes; reject absurd counts before reserving.
  if (count > r.remaining() / 2) {
    throw FormatError("count " + std::to_string(count) + " exceeds file size", dim_offset + 4);
  }
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t id_offset = r.offset();
    const auto len = r.get_le<std::uint16_t>("id length");
    std::string id(r.take(len, "id bytes"));
    if (!seen.emplace(id, i).second) {
      throw FormatError("duplicate id '" + id + "'", id_offset);
    }
    ids.push_back(std::move(id));
  }

  const std::uint64_t payload_offset = r.offset();
  const std::uint64_t row_bytes = std::uint64_t{dim} * 4;
  const std::uint64_t full_rows = r.remaining() / row_bytes;
  if (full_rows < count) {
    throw FormatError("payload declares " + std::to_string(count) + " rows, " +
                          std::to_string(full_rows) + " present",
                      payload_offset + full_rows * row_bytes);
  }
  std::vector<float> data(count * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(r.get_le<std::uint32_t>("payload"));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after payload", r.offset());
  try {
    return EmbeddingMatrix(dim, std::move(ids), std::move(data));
  } catch (const DomainError& e) {
    throw FormatError(e.what(), payload_offset);
  }
}

void store_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  io::write_file(path, encode_wcpe(m));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  return decode_wcpe(io::read_file(path));
}

}  // namespace webcp::embedding
