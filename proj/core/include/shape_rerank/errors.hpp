#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shape_rerank {

enum class ErrorKind {
  ParseError,
  EmptyCloud,
  NonFiniteCoordinate,
  DegenerateCloud,
  TooFewPoints,
  DimensionMismatch,
  DuplicateId,
  VersionMismatch,
  CorruptFile,
  UnknownModelId,
  MissingGroundTruth,
  MissingCategory,
  InvalidSpec,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for every failure in the library. The kind is the
/// stable, testable part; the message carries file/line context for users.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace shape_rerank
