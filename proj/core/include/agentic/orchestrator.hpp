#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentic/agents.hpp"
#include "agentic/backends.hpp"
#include "agentic/heater.hpp"
#include "agentic/plantio.hpp"
#include "agentic/twin.hpp"

namespace agentic::orch {

enum class ValidatorMode { Rule, Twin };
enum class SafeActionPolicy { ExpectedRule, ForceOff };

std::string_view to_string(ValidatorMode mode) noexcept;
std::string_view to_string(SafeActionPolicy policy) noexcept;
std::string_view to_string(agents::MonitorMode mode) noexcept;

struct TwinValidation {
  double horizon = 300.0;  // s
  agents::Envelope envelope{20.0, 35.0};
};

struct RunConfig {
  double duration = 2400.0;  // s
  int max_reprompts = 3;
  double sample_period_floor = 0.0;  // s; 0 samples as fast as decisions allow
  agents::Thresholds thresholds;
  ValidatorMode validator_mode = ValidatorMode::Rule;
  TwinValidation twin_validation;
  agents::MonitorMode monitor_mode = agents::MonitorMode::Continuous;
  double anomaly_margin = 0.0;   // °C
  double monitor_period = 1.0;   // s between quiet anomaly-mode polls
  plantio::ClockMode clock_mode = plantio::ClockMode::Lockstep;
  HeaterAction initial_action = HeaterAction::Off;
  SafeActionPolicy safe_action_policy = SafeActionPolicy::ExpectedRule;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct AttemptRecord {
  int attempt_index = 0;                // 0 = first pass
  std::optional<std::string> feedback;  // reprompt text that preceded this attempt
  std::string raw_response;
  std::optional<HeaterAction> parsed;      // nullopt: unparseable or backend error
  std::optional<agents::Verdict> verdict;  // nullopt: backend error
  std::string backend_error;
  double latency = 0.0;  // s

  bool passed() const noexcept { return verdict && verdict->passed; }
};

struct EpisodeRecord {
  int index = 0;
  double t_start = 0.0;
  double t_sensor = 0.0;
  HeaterAction prev_action = HeaterAction::Off;
  std::vector<AttemptRecord> attempts;
  HeaterAction applied = HeaterAction::Off;
  bool overridden = false;  // safety action applied after every attempt failed
  double t_end = 0.0;
};

HeaterAction safety_action(SafeActionPolicy policy, double t, HeaterAction prev,
                           const agents::Thresholds& th);

// Receives each episode as soon as it completes.
class EpisodeSink {
 public:
  virtual ~EpisodeSink() = default;
  virtual void write(const EpisodeRecord& episode) = 0;
};

// Sense, propose, validate, reprompt, apply.
//
// While the operator is thinking, the previously applied action stays in
// force and the plant clock advances by each attempt's latency. Backend
// errors and unparseable responses count as failed attempts. If no attempt
// passes within 1 + max_reprompts tries, the safety action is applied.
class ControlLoop {
 public:
  struct Agents {
    agents::AgentSpec operator_agent = agents::default_operator_agent();
    agents::TaskSpec operator_task = agents::default_operator_task();
  };

  // `twin_params` is required in twin validator mode.
  ControlLoop(RunConfig config, plantio::Plant& plant, backends::Backend& backend, Agents agents,
              std::optional<twin::TwinParams> twin_params = std::nullopt);

  EpisodeRecord run_episode(HeaterAction prev, int index = 0);

  // Runs until the plant clock reaches the configured duration. Every
  // completed episode is handed to `sink` before the next one starts.
  // PlantIoError propagates after the completed episodes have been written.
  std::vector<EpisodeRecord> run(EpisodeSink* sink = nullptr);

  const RunConfig& config() const noexcept { return config_; }

 private:
  agents::Verdict validate(HeaterAction proposal, const plantio::PlantSample& sample,
                           HeaterAction prev);
  void track_model(double until);
  void pass_time(double seconds, bool already_elapsed);

  RunConfig config_;
  plantio::Plant& plant_;
  backends::Backend& backend_;
  Agents agents_;
  std::optional<twin::TwinParams> twin_params_;
  // Open-loop twin run alongside the plant for twin validation.
  twin::TwinState model_state_;
  HeaterAction model_action_ = HeaterAction::Off;
};

}  // namespace agentic::orch
