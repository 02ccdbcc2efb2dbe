#pragma once

#include <stdexcept>
#include <string>

namespace conjcalc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, long expected, long actual)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(actual)) {}
};

/// A function that is +inf everywhere (empty effective domain).
class ImproperFunction : public Error {
 public:
  using Error::Error;
};

/// No affine minorant with the requested slope exists (f*(u) = +inf).
class NoMinorant : public Error {
 public:
  using Error::Error;
};

class MixedRepresentation : public Error {
 public:
  using Error::Error;
};

/// Operator parameters violate the family invariants (singular matrix, tau <= 0).
class InvalidOperator : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Document parsing / validation failure; `path` is a JSON pointer.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace conjcalc
