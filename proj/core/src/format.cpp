#include "agentic/format.hpp"

#include <cmath>

#include <fmt/format.h>

namespace agentic {

double round_half_away(double value, int decimals) {
  if (!std::isfinite(value)) return value;
  const double scale = std::pow(10.0, decimals);
  const double rounded = std::round(value * scale) / scale;
  return rounded == 0.0 ? 0.0 : rounded;
}

std::string fixed2(double value) { return fmt::format("{:.2f}", round_half_away(value, 2)); }

std::string compact(double value) { return fmt::format("{}", value == 0.0 ? 0.0 : value); }

std::string fixed6(double value) { return fmt::format("{:.6f}", round_half_away(value, 6)); }

}  // namespace agentic
