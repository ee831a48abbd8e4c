#include "agentic/orchestrator.hpp"

#include <cmath>

#include <fmt/format.h>

#include "agentic/errors.hpp"

namespace agentic::orch {

std::string_view to_string(ValidatorMode mode) noexcept {
  return mode == ValidatorMode::Twin ? "twin" : "rule";
}

std::string_view to_string(SafeActionPolicy policy) noexcept {
  return policy == SafeActionPolicy::ForceOff ? "force_off" : "expected_rule";
}

std::string_view to_string(agents::MonitorMode mode) noexcept {
  return mode == agents::MonitorMode::Anomaly ? "anomaly" : "continuous";
}

void RunConfig::validate() const {
  if (!std::isfinite(duration) || duration <= 0.0) {
    throw ConfigError(fmt::format("run.duration must be > 0 (got {})", duration));
  }
  if (max_reprompts < 0) throw ConfigError("run.max_reprompts must be >= 0");
  if (!std::isfinite(sample_period_floor) || sample_period_floor < 0.0) {
    throw ConfigError("run.sample_period_floor must be >= 0");
  }
  thresholds.validate();
  if (monitor_mode == agents::MonitorMode::Anomaly) {
    if (!std::isfinite(anomaly_margin) || anomaly_margin < 0.0) {
      throw ConfigError("run.monitor.margin must be >= 0");
    }
    if (!std::isfinite(monitor_period) || monitor_period <= 0.0) {
      throw ConfigError("run.monitor.period must be > 0");
    }
  }
  if (validator_mode == ValidatorMode::Twin) {
    if (!std::isfinite(twin_validation.horizon) || twin_validation.horizon <= 0.0) {
      throw ConfigError("run.validator.horizon must be > 0");
    }
    const auto& env = twin_validation.envelope;
    if (std::isnan(env.min) || std::isnan(env.max) || env.min > env.max) {
      throw ConfigError("run.validator.envelope must satisfy min <= max");
    }
  }
}

HeaterAction safety_action(SafeActionPolicy policy, double t, HeaterAction prev,
                           const agents::Thresholds& th) {
  if (policy == SafeActionPolicy::ForceOff) return HeaterAction::Off;
  return agents::expected_action(t, prev, th);
}

ControlLoop::ControlLoop(RunConfig config, plantio::Plant& plant, backends::Backend& backend,
                         Agents agents, std::optional<twin::TwinParams> twin_params)
    : config_(config),
      plant_(plant),
      backend_(backend),
      agents_(std::move(agents)),
      twin_params_(twin_params) {
  config_.validate();
  agents_.operator_task.validate();
  if (config_.validator_mode == ValidatorMode::Twin && !twin_params_) {
    throw ConfigError("twin validator mode needs twin parameters");
  }
  if (twin_params_) {
    model_state_ = twin::ambient_state(*twin_params_);
    model_state_.clock = plant_.clock();
  }
}

void ControlLoop::track_model(double until) {
  if (!twin_params_ || until <= model_state_.clock) return;
  model_state_ = twin::step(*twin_params_, model_state_, duty_of(model_action_),
                            until - model_state_.clock);
}

agents::Verdict ControlLoop::validate(HeaterAction proposal, const plantio::PlantSample& sample,
                                      HeaterAction prev) {
  if (config_.validator_mode == ValidatorMode::Rule) {
    return agents::validate_rule(proposal, sample.t_sensor, prev, config_.thresholds);
  }
  twin::TwinState start = model_state_;
  start.t_sensor = sample.t_sensor;
  return agents::validate_twin(*twin_params_, proposal, start, config_.twin_validation.horizon,
                               config_.twin_validation.envelope);
}

void ControlLoop::pass_time(double seconds, bool already_elapsed) {
  // Realtime runs with wall-clock backends have already waited.
  if (config_.clock_mode == plantio::ClockMode::Realtime && already_elapsed) return;
  plant_.advance(seconds);
}

EpisodeRecord ControlLoop::run_episode(HeaterAction prev, int index) {
  const plantio::PlantSample sample = plant_.read_temperature();
  track_model(sample.timestamp);

  EpisodeRecord ep;
  ep.index = index;
  ep.t_start = sample.timestamp;
  ep.t_sensor = sample.t_sensor;
  ep.prev_action = prev;

  const auto& th = config_.thresholds;
  std::optional<std::string> feedback;
  std::optional<HeaterAction> chosen;

  for (int attempt = 0; attempt <= config_.max_reprompts; ++attempt) {
    AttemptRecord rec;
    rec.attempt_index = attempt;
    rec.feedback = feedback;

    backends::DecisionRequest request;
    request.prompt = agents::render_prompt(agents_.operator_agent, agents_.operator_task, sample,
                                           prev, th, feedback);
    request.t_sensor = sample.t_sensor;
    request.prev = prev;
    request.thresholds = th;
    request.has_feedback = feedback.has_value();
    request.timestamp = plant_.clock();

    try {
      const backends::Exchange ex = backend_.complete(request);
      rec.raw_response = ex.response_text;
      rec.latency = ex.latency;
      pass_time(ex.latency, backend_.wall_clock_latency());
      rec.parsed = agents::try_parse_action(ex.response_text);
      if (rec.parsed) {
        rec.verdict = validate(*rec.parsed, sample, prev);
      } else {
        agents::Verdict unparsed;
        unparsed.reason = "no ACTION line found";
        if (config_.validator_mode == ValidatorMode::Rule) {
          unparsed.expected = agents::expected_action(sample.t_sensor, prev, th);
        }
        rec.verdict = unparsed;
      }
    } catch (const BackendError& e) {
      rec.backend_error = e.what();
      rec.latency = e.latency();
      pass_time(e.latency(), backend_.wall_clock_latency());
    }

    const bool passed = rec.passed();
    if (!passed && attempt < config_.max_reprompts) {
      const agents::Verdict failed = rec.verdict.value_or(agents::Verdict{});
      feedback = agents::compose_feedback(failed, attempt + 1, config_.max_reprompts,
                                          sample.t_sensor, prev, rec.parsed, th);
    }
    if (passed) chosen = rec.parsed;
    ep.attempts.push_back(std::move(rec));
    if (passed) break;
  }

  if (chosen) {
    ep.applied = *chosen;
  } else {
    ep.applied = safety_action(config_.safe_action_policy, sample.t_sensor, prev, th);
    ep.overridden = true;
  }

  track_model(plant_.clock());
  plant_.apply_heater(ep.applied);
  model_action_ = ep.applied;
  ep.t_end = plant_.clock();
  return ep;
}

std::vector<EpisodeRecord> ControlLoop::run(EpisodeSink* sink) {
  std::vector<EpisodeRecord> episodes;
  HeaterAction prev = config_.initial_action;
  plant_.apply_heater(prev);
  model_action_ = prev;

  const bool gated = config_.monitor_mode == agents::MonitorMode::Anomaly;
  int index = 0;
  while (plant_.clock() < config_.duration) {
    if (gated && index > 0) {
      const plantio::PlantSample probe = plant_.read_temperature();
      if (!agents::monitor_trigger(probe, config_.monitor_mode, config_.thresholds,
                                   config_.anomaly_margin)) {
        track_model(probe.timestamp);
        plant_.advance(std::max(config_.monitor_period, config_.sample_period_floor));
        continue;
      }
    }

    EpisodeRecord ep = run_episode(prev, index++);
    prev = ep.applied;
    if (sink != nullptr) sink->write(ep);

    const double target = std::max(ep.t_end, ep.t_start + config_.sample_period_floor);
    const double now = plant_.clock();
    if (now < target) plant_.advance(target - now);
    if (plant_.clock() <= ep.t_start) {
      episodes.push_back(std::move(ep));
      throw InvalidState(
          "control loop made no progress: the episode took no plant time and "
          "sample_period_floor is 0 (give the backend a latency or set a floor)");
    }
    episodes.push_back(std::move(ep));
  }
  return episodes;
}

}  // namespace agentic::orch
