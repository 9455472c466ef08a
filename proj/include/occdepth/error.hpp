#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace occdepth {

// Input bytes that do not form the carrier format at all: broken JSON,
// a bad PGM/PFM header, an order token that matches no grammar production.
// Carries the byte offset of the first offending position when known.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& msg, std::size_t byte_offset)
      : std::runtime_error(msg + " (byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}

  std::optional<std::size_t> offset() const { return offset_; }

 private:
  std::optional<std::size_t> offset_;
};

// Structurally well-formed input that violates the schema, a type invariant,
// or an operation precondition. Carries a document path ("images[2].depth[0]")
// when the violation comes from a parsed document.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& msg)
      : std::runtime_error(path.empty() ? msg : path + ": " + msg),
        path_(std::move(path)) {}

  explicit ValidationError(const std::string& msg) : ValidationError("", msg) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace occdepth
