#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace webcp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on numeric input was violated (zero norm, T <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data. `offset()` is the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Network or I/O failure. Retriable errors may succeed on a later attempt.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retriable) : Error(what), retriable_(retriable) {}

  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

/// A search provider refused the query (quota, auth). Terminal.
class SearchDeniedError : public Error {
 public:
  SearchDeniedError(const std::string& class_id, const std::string& reason)
      : Error("search provider denied query for class '" + class_id + "': " + reason),
        class_id_(class_id) {}

  const std::string& class_id() const noexcept { return class_id_; }

 private:
  std::string class_id_;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(const std::string& id)
      : Error("missing embedding for id '" + id + "'"), id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

}  // namespace webcp
