#include "agentic/errors.hpp"

#include <fmt/format.h>

namespace agentic {

BackendError::BackendError(Kind kind, int status, const std::string& what, double latency)
    : Error(what), kind_(kind), status_(status), latency_(latency) {}

LogFormatError::LogFormatError(std::size_t line, const std::string& what)
    : Error(line == 0 ? what : fmt::format("line {}: {}", line, what)), line_(line) {}

}  // namespace agentic
