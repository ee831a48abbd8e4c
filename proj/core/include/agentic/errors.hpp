#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agentic {

// Base of every error raised by the library. Callers that only need a
// diagnostic can catch this; the CLI maps the concrete types to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class PlantIoError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ReplayExhausted : public Error {
 public:
  using Error::Error;
};

// Raised by decision backends. `status` is the HTTP status for non-success
// replies and 0 for transport failures or malformed bodies. `latency` is the
// wall time spent before giving up, so the control loop can account for it.
class BackendError : public Error {
 public:
  enum class Kind { Status, Transport, Malformed };

  BackendError(Kind kind, int status, const std::string& what, double latency = 0.0);

  Kind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }
  double latency() const noexcept { return latency_; }

 private:
  Kind kind_;
  int status_;
  double latency_;
};

// Malformed run log. `line` is 1-based; 0 when the problem is not tied to a line.
class LogFormatError : public Error {
 public:
  LogFormatError(std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace agentic
