#pragma once

#include <optional>
#include <string_view>

namespace agentic {

// Binary heater command. The case-study plant only ever runs at 0 % or
// 100 % duty.
enum class HeaterAction { Off, On };

constexpr double duty_of(HeaterAction action) noexcept {
  return action == HeaterAction::On ? 100.0 : 0.0;
}

constexpr HeaterAction opposite(HeaterAction action) noexcept {
  return action == HeaterAction::On ? HeaterAction::Off : HeaterAction::On;
}

// "ON" / "OFF".
std::string_view to_string(HeaterAction action) noexcept;

// Case-insensitive inverse of to_string.
std::optional<HeaterAction> heater_action_from_string(std::string_view text) noexcept;

}  // namespace agentic
