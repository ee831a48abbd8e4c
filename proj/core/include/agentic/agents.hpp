#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentic/heater.hpp"
#include "agentic/plantio.hpp"
#include "agentic/twin.hpp"

namespace agentic::agents {

// Declarative agent description: what it is for, what it should achieve,
// which decision backend drives it, and the tools it may call.
struct AgentSpec {
  std::string name;
  std::string role;
  std::string goal;
  std::string backend;
  std::vector<std::string> tools;
};

// Task text for an agent. The template may reference {temperature},
// {prev_action}, {low}, {high} and {feedback}; nothing else.
struct TaskSpec {
  std::string description_template;
  std::string expected_output_hint;

  // Throws TemplateError on an undeclared placeholder.
  void validate() const;
};

struct Thresholds {
  double low = 25.0;   // °C, heater turns ON below this
  double high = 27.0;  // °C, heater turns OFF above this

  // Throws ConfigError unless low < high (both finite).
  void validate() const;
  double midpoint() const noexcept { return 0.5 * (low + high); }

  bool operator==(const Thresholds&) const = default;
};

struct Verdict {
  bool passed = false;
  std::optional<HeaterAction> expected;  // always set by the rule validator
  std::string reason;
};

struct Prompt {
  std::string system_text;
  std::string user_text;
};

// Admissible sensor temperatures for twin validation. Infinite bounds are
// allowed.
struct Envelope {
  double min;
  double max;
};

enum class MonitorMode { Continuous, Anomaly };

inline constexpr std::string_view kFeedbackMarker = "VALIDATION FAILED";

// Defaults for the temperature-control operator.
AgentSpec default_operator_agent();
TaskSpec default_operator_task();
AgentSpec default_validator_agent();
AgentSpec default_reprompter_agent();

// system_text: role and goal separated by a blank line.
// user_text: the rendered task, the expected-output hint, and the feedback
// block when feedback is given (unless the template places {feedback}
// itself).
Prompt render_prompt(const AgentSpec& spec, const TaskSpec& task, const plantio::PlantSample& sample,
                     HeaterAction prev, const Thresholds& thresholds,
                     const std::optional<std::string>& feedback);

// Last case-insensitive "ACTION: ON|OFF" in the response. Throws ParseError.
HeaterAction parse_action(std::string_view response);
std::optional<HeaterAction> try_parse_action(std::string_view response);

// Hysteresis rule: OFF above high, ON below low, else hold `prev`.
// Exactly-at-threshold temperatures hold.
HeaterAction expected_action(double t, HeaterAction prev, const Thresholds& th);

Verdict validate_rule(HeaterAction proposal, double t, HeaterAction prev, const Thresholds& th);

// Rolls the twin forward under the proposal and checks every sample of the
// sensor trajectory against the envelope.
Verdict validate_twin(const twin::TwinParams& params, HeaterAction proposal,
                      const twin::TwinState& state, double horizon, const Envelope& envelope);

// Reprompt text for a failed attempt. `proposal` is nullopt when the
// response could not be parsed. `attempt` numbers the upcoming reprompt
// (1-based) and `max_attempts` is the reprompt budget. Throws InvalidState
// when handed a passing verdict for a parsed proposal.
std::string compose_feedback(const Verdict& verdict, int attempt, int max_attempts, double t,
                             HeaterAction prev, std::optional<HeaterAction> proposal,
                             const Thresholds& th);

// Whether a sample starts a decision episode.
bool monitor_trigger(const plantio::PlantSample& sample, MonitorMode mode, const Thresholds& th,
                     double margin);

}  // namespace agentic::agents
