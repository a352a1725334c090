#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace morphalign {

enum class ErrorKind { io, parameter, format, geometry, numerical, range };

std::string_view to_string(ErrorKind kind) noexcept;

// Base of every error thrown by the library. The kind drives CLI exit codes
// and the "failed:<kind>" manifest status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorKind::parameter, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorKind::format, what) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what)
      : Error(ErrorKind::geometry, what) {}
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int iteration)
      : Error(ErrorKind::numerical, what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorKind::range, what) {}
};

}  // namespace morphalign
