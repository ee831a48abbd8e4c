#pragma once

#include <string>

namespace agentic {

// Rounds half away from zero to `decimals` places. Negative zero is
// normalized to +0 so formatted output never shows "-0.00".
double round_half_away(double value, int decimals);

// Fixed two-decimal rendering used for temperatures, percentages and
// seconds in prompts, the plant protocol and reports.
std::string fixed2(double value);

// Shortest rendering for configuration constants such as thresholds
// ("25", "27.5").
std::string compact(double value);

// Fixed six-decimal rendering for run-log timestamps and latencies.
std::string fixed6(double value);

}  // namespace agentic
