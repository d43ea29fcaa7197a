#pragma once

#include <stdexcept>
#include <string>

namespace volest {

// Failure categories. The C API maps each one onto a status code and the CLI
// maps status codes onto process exit codes.
enum class ErrorKind {
  Config,      // invalid option values, missing required settings
  Data,        // schema violations, malformed rows, inconsistent inputs
  Numeric,     // non-finite values during computation
  Structural,  // shape/dimension mismatches, misuse of an API contract
  Io,          // missing or unreadable/unwritable files
  Format,      // model file is not a model file (bad magic)
  Version,     // model file written by an unsupported schema version
  Truncated,   // model file ends early
  Shape,       // model file parses but its arrays are inconsistent
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct DataError : Error {
  explicit DataError(const std::string& w) : Error(ErrorKind::Data, w) {}
};
struct StructuralError : Error {
  explicit StructuralError(const std::string& w) : Error(ErrorKind::Structural, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

// Raised when a computation produces NaN/Inf. `layer` is the network layer
// index where it was detected, or -1 when not applicable.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& w, int layer = -1)
      : Error(ErrorKind::Numeric, w), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

struct ModelFormatError : Error {
  explicit ModelFormatError(const std::string& w) : Error(ErrorKind::Format, w) {}
};
struct ModelVersionError : Error {
  explicit ModelVersionError(const std::string& w) : Error(ErrorKind::Version, w) {}
};
struct ModelTruncatedError : Error {
  explicit ModelTruncatedError(const std::string& w) : Error(ErrorKind::Truncated, w) {}
};
struct ModelShapeError : Error {
  explicit ModelShapeError(const std::string& w) : Error(ErrorKind::Shape, w) {}
};

}  // namespace volest
