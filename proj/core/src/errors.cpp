#include "shape_rerank/errors.hpp"

namespace shape_rerank {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::UnknownModelId: return "UnknownModelId";
    case ErrorKind::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorKind::MissingCategory: return "MissingCategory";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace shape_rerank
