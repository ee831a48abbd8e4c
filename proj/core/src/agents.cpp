#include "agentic/agents.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <regex>

#include <fmt/format.h>

#include "agentic/errors.hpp"
#include "agentic/format.hpp"

namespace agentic::agents {
namespace {

constexpr std::array<std::string_view, 5> kPlaceholders = {"temperature", "prev_action", "low",
                                                           "high", "feedback"};

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Visits every "{identifier}" in the template. Braces around anything else
// (JSON snippets, set notation) are literal text.
template <typename OnText, typename OnPlaceholder>
void scan_template(std::string_view tpl, OnText on_text, OnPlaceholder on_placeholder) {
  std::size_t i = 0;
  while (i < tpl.size()) {
    const std::size_t open = tpl.find('{', i);
    if (open == std::string_view::npos) {
      on_text(tpl.substr(i));
      return;
    }
    std::size_t j = open + 1;
    while (j < tpl.size() && is_ident_char(tpl[j])) ++j;
    if (j < tpl.size() && tpl[j] == '}' && j > open + 1) {
      on_text(tpl.substr(i, open - i));
      on_placeholder(tpl.substr(open + 1, j - open - 1));
      i = j + 1;
    } else {
      on_text(tpl.substr(i, open + 1 - i));
      i = open + 1;
    }
  }
}

bool declared(std::string_view name) {
  for (auto p : kPlaceholders) {
    if (p == name) return true;
  }
  return false;
}

bool references_feedback(std::string_view tpl) {
  bool found = false;
  scan_template(tpl, [](std::string_view) {}, [&](std::string_view name) {
    if (name == "feedback") found = true;
  });
  return found;
}

std::string rule_text(const Thresholds& th) {
  return fmt::format("turn OFF above {}°C, turn ON below {}°C, otherwise hold the previous state",
                     compact(th.high), compact(th.low));
}

}  // namespace

void TaskSpec::validate() const {
  scan_template(description_template, [](std::string_view) {}, [](std::string_view name) {
    if (!declared(name)) {
      throw TemplateError(fmt::format("task template references undeclared placeholder {{{}}}", name));
    }
  });
}

void Thresholds::validate() const {
  if (!std::isfinite(low) || !std::isfinite(high)) throw ConfigError("thresholds must be finite");
  if (!(low < high)) {
    throw ConfigError(fmt::format("thresholds.low ({}) must be below thresholds.high ({})", low, high));
  }
}

AgentSpec default_operator_agent() {
  return {
      "operator",
      "Temperature control operator for a heater-equipped process unit.",
      "Keep the measured temperature inside its allowed band by switching the heater on or off "
      "at the right moments.",
      "default",
      {},
  };
}

TaskSpec default_operator_task() {
  return {
      "The sensor currently reads {temperature}°C and the heater is {prev_action}. "
      "Switch the heater OFF when the temperature is above {high}°C and ON when it is below "
      "{low}°C; between the two limits keep the heater as it is.",
      "One or two sentences of reasoning, then a final line that is exactly 'ACTION: ON' or "
      "'ACTION: OFF'.",
  };
}

AgentSpec default_validator_agent() {
  return {
      "validator",
      "Validator that checks each proposed heater action before it reaches the plant.",
      "Approve only actions that follow the control rule; flag everything else with the reason.",
      "",
      {},
  };
}

AgentSpec default_reprompter_agent() {
  return {
      "reprompter",
      "Reprompter that turns validation failures into corrective guidance for the operator.",
      "Explain what was wrong with a rejected action so the next proposal complies.",
      "",
      {},
  };
}

Prompt render_prompt(const AgentSpec& spec, const TaskSpec& task, const plantio::PlantSample& sample,
                     HeaterAction prev, const Thresholds& thresholds,
                     const std::optional<std::string>& feedback) {
  std::string user;
  scan_template(task.description_template, [&](std::string_view text) { user.append(text); },
                [&](std::string_view name) {
                  if (name == "temperature") {
                    user += plantio::format_temperature(sample.t_sensor);
                  } else if (name == "prev_action") {
                    user += to_string(prev);
                  } else if (name == "low") {
                    user += compact(thresholds.low);
                  } else if (name == "high") {
                    user += compact(thresholds.high);
                  } else if (name == "feedback") {
                    if (feedback) user += *feedback;
                  } else {
                    throw TemplateError(fmt::format("unbound placeholder {{{}}}", name));
                  }
                });
  if (!task.expected_output_hint.empty()) {
    user += "\n\nExpected output: ";
    user += task.expected_output_hint;
  }
  if (feedback && !references_feedback(task.description_template)) {
    user += "\n\n";
    user += *feedback;
  }
  return {spec.role + "\n\n" + spec.goal, std::move(user)};
}

std::optional<HeaterAction> try_parse_action(std::string_view response) {
  static const std::regex pattern(R"(action[ \t\r\n]*:[ \t\r\n]*(on|off)\b)", std::regex::icase);
  std::optional<HeaterAction> last;
  for (std::cregex_iterator it(response.data(), response.data() + response.size(), pattern), end;
       it != end; ++it) {
    last = heater_action_from_string((*it)[1].str());
  }
  return last;
}

HeaterAction parse_action(std::string_view response) {
  if (auto action = try_parse_action(response)) return *action;
  throw ParseError("no ACTION line found");
}

HeaterAction expected_action(double t, HeaterAction prev, const Thresholds& th) {
  if (t > th.high) return HeaterAction::Off;
  if (t < th.low) return HeaterAction::On;
  return prev;
}

Verdict validate_rule(HeaterAction proposal, double t, HeaterAction prev, const Thresholds& th) {
  const HeaterAction expected = expected_action(t, prev, th);
  const std::string temp = plantio::format_temperature(t);
  std::string clause;
  if (t > th.high) {
    clause = fmt::format("{}°C is above the upper limit {}°C, so the heater must be OFF", temp,
                         compact(th.high));
  } else if (t < th.low) {
    clause = fmt::format("{}°C is below the lower limit {}°C, so the heater must be ON", temp,
                         compact(th.low));
  } else {
    clause = fmt::format("{}°C is inside [{}, {}]°C, so the previous state {} must be held", temp,
                         compact(th.low), compact(th.high), to_string(prev));
  }
  if (proposal == expected) return {true, expected, "action complies: " + clause};
  return {false, expected, clause};
}

Verdict validate_twin(const twin::TwinParams& params, HeaterAction proposal,
                      const twin::TwinState& state, double horizon, const Envelope& envelope) {
  if (std::isnan(envelope.min) || std::isnan(envelope.max) || envelope.min > envelope.max) {
    throw InvalidInput("twin validation envelope must satisfy min <= max");
  }
  const twin::Trajectory trajectory = twin::rollout(params, state, duty_of(proposal), horizon);
  for (const auto& point : trajectory) {
    if (point.t_sensor < envelope.min || point.t_sensor > envelope.max) {
      return {false, std::nullopt,
              fmt::format("twin rollout of heater {} leaves the safe envelope [{}, {}]°C: sensor at "
                          "{:.3f}°C after {:.1f} s",
                          to_string(proposal), compact(envelope.min), compact(envelope.max),
                          point.t_sensor, point.clock - state.clock)};
    }
  }
  return {true, std::nullopt,
          fmt::format("twin rollout of heater {} stays within [{}, {}]°C for {} s",
                      to_string(proposal), compact(envelope.min), compact(envelope.max),
                      compact(horizon))};
}

std::string compose_feedback(const Verdict& verdict, int attempt, int max_attempts, double t,
                             HeaterAction prev, std::optional<HeaterAction> proposal,
                             const Thresholds& th) {
  if (proposal && verdict.passed) {
    throw InvalidState("compose_feedback called for a passing verdict");
  }
  const std::string proposal_text = proposal ? std::string(to_string(*proposal)) : "UNPARSEABLE";
  const std::string reason = proposal ? verdict.reason : "no ACTION line found";
  return fmt::format(
      "{} (attempt {}/{}): at {}°C with previous heater state {}, your proposed action {} "
      "violates the control rule: {}. Rule: {}. Respond with a final line 'ACTION: ON' or "
      "'ACTION: OFF'.",
      kFeedbackMarker, attempt, max_attempts, plantio::format_temperature(t), to_string(prev),
      proposal_text, reason, rule_text(th));
}

bool monitor_trigger(const plantio::PlantSample& sample, MonitorMode mode, const Thresholds& th,
                     double margin) {
  if (mode == MonitorMode::Continuous) return true;
  return sample.t_sensor < th.low - margin || sample.t_sensor > th.high + margin;
}

}  // namespace agentic::agents
