#pragma once

#include <stdexcept>
#include <string>

namespace refugia {

// Failure categories line up with the CLI exit codes and the C API status
// values (see refugia.h).
enum class ErrorKind {
  InvalidArgument,
  Config,
  Solver,
  Monitor,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what)
      : Error(ErrorKind::Solver, what) {}
};

class MonitorError : public Error {
 public:
  explicit MonitorError(const std::string& what)
      : Error(ErrorKind::Monitor, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace refugia
