#pragma once

#include <stdexcept>
#include <string>

namespace pcflow {

enum class ErrorKind {
  NonPositiveDensity,
  BadGrid,
  ShapeError,
  NotKahler,
  SingularSolve,
  ToleranceNotMet,
  ParseError,
  ValidationError,
  IoError,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when a potential leaves the Kähler cone. `stage` is the RK stage
// (1-based) or 0 outside a time step.
class NotKahlerError : public Error {
 public:
  NotKahlerError(double min_rho, int stage = 0);

  double min_rho() const { return min_rho_; }
  int stage() const { return stage_; }

 private:
  double min_rho_;
  int stage_;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace pcflow
