#include "pcflow/error.hpp"

#include <cstdio>

namespace pcflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorKind::BadGrid: return "BadGrid";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::NotKahler: return "NotKahler";
    case ErrorKind::SingularSolve: return "SingularSolve";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {
std::string not_kahler_message(double min_rho, int stage) {
  char buf[128];
  if (stage > 0) {
    std::snprintf(buf, sizeof buf, "not Kahler at stage %d: min rho = %.6g", stage, min_rho);
  } else {
    std::snprintf(buf, sizeof buf, "not Kahler: min rho = %.6g", min_rho);
  }
  return buf;
}
}  // namespace

NotKahlerError::NotKahlerError(double min_rho, int stage)
    : Error(ErrorKind::NotKahler, not_kahler_message(min_rho, stage)),
      min_rho_(min_rho),
      stage_(stage) {}

ParseError::ParseError(int line, const std::string& message)
    : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + message),
      line_(line) {}

ValidationError::ValidationError(const std::string& key, const std::string& message)
    : Error(ErrorKind::ValidationError, key + ": " + message), key_(key) {}

}  // namespace pcflow
