#include <chrono>
#include <deque>
#include <functional>

#include <gtest/gtest.h>

#include "agentic/backends.hpp"
#include "agentic/errors.hpp"
#include "agentic/orchestrator.hpp"
#include "agentic/plantio.hpp"

using namespace agentic;
using namespace agentic::orch;
using backends::LatencyModel;
using backends::ScriptedBackend;
using backends::ScriptedPolicy;
using plantio::ClockMode;
using plantio::SimulatedPlant;

namespace {

// Replies from a queue of canned outcomes; empty string entries throw.
class CannedBackend final : public backends::Backend {
 public:
  explicit CannedBackend(std::deque<std::string> replies, double latency = 1.0)
      : replies_(std::move(replies)), latency_(latency) {}
  backends::Exchange complete(const backends::DecisionRequest& request) override {
    prompts.push_back(request.prompt.user_text);
    std::string next = replies_.empty() ? "ACTION: OFF" : replies_.front();
    if (!replies_.empty()) replies_.pop_front();
    if (next.empty()) throw BackendError(BackendError::Kind::Status, 503, "unavailable", latency_);
    backends::Exchange ex;
    ex.response_text = next;
    ex.latency = latency_;
    return ex;
  }
  bool wall_clock_latency() const noexcept override { return false; }
  std::string describe() const override { return "canned"; }
  std::vector<std::string> prompts;

 private:
  std::deque<std::string> replies_;
  double latency_;
};

SimulatedPlant plant_at(double t) { return SimulatedPlant({}, ClockMode::Lockstep, {t, t, 0.0}); }

}  // namespace

TEST(RunEpisode, OraclePassesFirstTime) {
  auto plant = plant_at(28.0);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(2.0));
  ControlLoop loop({}, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::On);
  ASSERT_EQ(e.attempts.size(), 1u);
  EXPECT_TRUE(e.attempts[0].passed());
  EXPECT_EQ(e.applied, HeaterAction::Off);
  EXPECT_FALSE(e.overridden);
  EXPECT_DOUBLE_EQ(e.t_end - e.t_start, 2.0);
}

TEST(RunEpisode, DegenerateFlipNeedsOneReprompt) {
  auto plant = plant_at(24.0);
  ScriptedBackend backend(ScriptedPolicy::flip(1.0, 1.0, 0), LatencyModel::fixed(1.0));
  ControlLoop loop({}, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::Off);
  ASSERT_EQ(e.attempts.size(), 2u);
  EXPECT_FALSE(e.attempts[0].passed());
  EXPECT_TRUE(e.attempts[1].passed());
  EXPECT_EQ(e.applied, HeaterAction::On);
  EXPECT_FALSE(e.overridden);
  ASSERT_TRUE(e.attempts[1].feedback.has_value());
  EXPECT_NE(e.attempts[1].feedback->find("attempt 1/3"), std::string::npos);
}

TEST(RunEpisode, AlwaysWrongTriggersSafetyOverride) {
  auto plant = plant_at(28.0);
  ScriptedBackend backend(ScriptedPolicy::always_wrong(), LatencyModel::fixed(1.0));
  ControlLoop loop({}, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::On);
  ASSERT_EQ(e.attempts.size(), 4u);
  for (const auto& a : e.attempts) EXPECT_FALSE(a.passed());
  EXPECT_TRUE(e.overridden);
  EXPECT_EQ(e.applied, HeaterAction::Off);
  EXPECT_DOUBLE_EQ(e.t_end - e.t_start, 4.0);
}

TEST(RunEpisode, ForceOffPolicy) {
  auto plant = plant_at(24.0);
  ScriptedBackend backend(ScriptedPolicy::always_wrong(), LatencyModel::fixed(1.0));
  RunConfig cfg;
  cfg.safe_action_policy = SafeActionPolicy::ForceOff;
  cfg.max_reprompts = 0;
  ControlLoop loop(cfg, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::Off);
  EXPECT_EQ(e.attempts.size(), 1u);
  EXPECT_TRUE(e.overridden);
  EXPECT_EQ(e.applied, HeaterAction::Off);
}

TEST(RunEpisode, ParseFailuresAndBackendErrorsAreFailedAttempts) {
  auto plant = plant_at(24.0);
  CannedBackend backend({"I am not sure", "", "ACTION: ON"});
  ControlLoop loop({}, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::Off);
  ASSERT_EQ(e.attempts.size(), 3u);
  EXPECT_FALSE(e.attempts[0].parsed.has_value());
  ASSERT_TRUE(e.attempts[0].verdict.has_value());
  EXPECT_EQ(e.attempts[0].verdict->reason, "no ACTION line found");
  EXPECT_NE(e.attempts[1].feedback->find("UNPARSEABLE"), std::string::npos);
  EXPECT_FALSE(e.attempts[1].verdict.has_value());
  EXPECT_FALSE(e.attempts[1].backend_error.empty());
  EXPECT_TRUE(e.attempts[2].passed());
  EXPECT_EQ(e.applied, HeaterAction::On);
  EXPECT_DOUBLE_EQ(e.t_end - e.t_start, 3.0);
  EXPECT_NE(backend.prompts[2].find("VALIDATION FAILED"), std::string::npos);
}

TEST(RunEpisode, BackendErrorOnLastAttemptOverrides) {
  auto plant = plant_at(28.0);
  CannedBackend backend({"", ""});
  RunConfig cfg;
  cfg.max_reprompts = 1;
  ControlLoop loop(cfg, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::On);
  EXPECT_EQ(e.attempts.size(), 2u);
  EXPECT_TRUE(e.overridden);
  EXPECT_EQ(e.applied, HeaterAction::Off);
}

TEST(RunEpisode, PreviousActionHeldDuringInference) {
  auto plant = plant_at(24.0);
  plant.apply_heater(HeaterAction::Off);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(30.0));
  ControlLoop loop({}, plant, backend, {});
  const EpisodeRecord e = loop.run_episode(HeaterAction::Off);
  EXPECT_EQ(e.applied, HeaterAction::On);
  // Heater was off for the 30 s of inference, so the plant cooled.
  EXPECT_LT(plant.state().t_sensor, 24.0);
}

TEST(SafetyAction, Examples) {
  const agents::Thresholds th;
  EXPECT_EQ(safety_action(SafeActionPolicy::ExpectedRule, 24.0, HeaterAction::Off, th), HeaterAction::On);
  EXPECT_EQ(safety_action(SafeActionPolicy::ForceOff, 24.0, HeaterAction::Off, th), HeaterAction::Off);
  EXPECT_EQ(safety_action(SafeActionPolicy::ExpectedRule, 26.0, HeaterAction::On, th), HeaterAction::On);
}

TEST(RunLoop, EpisodeCountFollowsLatency) {
  SimulatedPlant plant({}, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(5.67));
  ControlLoop loop({}, plant, backend, {});
  const auto episodes = loop.run();
  EXPECT_NEAR(static_cast<double>(episodes.size()), 423.0, 1.0);
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    EXPECT_EQ(episodes[i].index, static_cast<int>(i));
    EXPECT_EQ(episodes[i].attempts.size(), 1u);
    if (i > 0) {
      EXPECT_EQ(episodes[i].prev_action, episodes[i - 1].applied);
    }
  }
}

TEST(RunLoop, AtLeastOneEpisode) {
  SimulatedPlant plant({}, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(1.0));
  RunConfig cfg;
  cfg.duration = 0.001;
  ControlLoop loop(cfg, plant, backend, {});
  EXPECT_EQ(loop.run().size(), 1u);
}

TEST(RunLoop, SamplePeriodFloorSpacesEpisodes) {
  SimulatedPlant plant({}, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(1.0));
  RunConfig cfg;
  cfg.duration = 100.0;
  cfg.sample_period_floor = 10.0;
  ControlLoop loop(cfg, plant, backend, {});
  const auto episodes = loop.run();
  ASSERT_EQ(episodes.size(), 10u);
  for (std::size_t i = 0; i < episodes.size(); ++i) EXPECT_NEAR(episodes[i].t_start, 10.0 * i, 1e-9);
}

TEST(RunLoop, AnomalyGateStaysQuietInsideBand) {
  twin::TwinParams params;
  params.t_amb = 26.0;
  SimulatedPlant plant(params, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(2.0));
  RunConfig cfg;
  cfg.duration = 600.0;
  cfg.monitor_mode = agents::MonitorMode::Anomaly;
  ControlLoop loop(cfg, plant, backend, {});
  const auto episodes = loop.run();
  EXPECT_EQ(episodes.size(), 1u);
  EXPECT_GE(plant.clock(), 600.0);
}

TEST(RunLoop, AnomalyGateFiresOutsideBand) {
  SimulatedPlant plant({}, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(2.0));
  RunConfig cfg;
  cfg.duration = 1200.0;
  cfg.monitor_mode = agents::MonitorMode::Anomaly;
  cfg.anomaly_margin = 0.5;
  ControlLoop loop(cfg, plant, backend, {});
  const auto episodes = loop.run();
  ASSERT_GT(episodes.size(), 2u);
  for (std::size_t i = 1; i < episodes.size(); ++i) {
    const double t = episodes[i].t_sensor;
    EXPECT_TRUE(t < 24.5 || t > 27.5) << t;
  }
}

TEST(RunLoop, TwinValidatorMode) {
  SimulatedPlant plant({}, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(5.0));
  RunConfig cfg;
  cfg.duration = 300.0;
  cfg.validator_mode = ValidatorMode::Twin;
  cfg.twin_validation = {120.0, {20.0, 45.0}};
  ControlLoop loop(cfg, plant, backend, {}, twin::TwinParams{});
  const auto episodes = loop.run();
  ASSERT_FALSE(episodes.empty());
  for (const auto& e : episodes) {
    ASSERT_TRUE(e.attempts[0].verdict.has_value());
    EXPECT_FALSE(e.attempts[0].verdict->expected.has_value());
    EXPECT_TRUE(e.attempts[0].passed());
  }
}

TEST(RunLoop, TwinValidatorRejectsUnsafeHeating) {
  auto plant = plant_at(26.0);
  ScriptedBackend backend(ScriptedPolicy::always_wrong(), LatencyModel::fixed(1.0));
  RunConfig cfg;
  cfg.validator_mode = ValidatorMode::Twin;
  cfg.twin_validation = {600.0, {20.0, 28.0}};
  ControlLoop loop(cfg, plant, backend, {}, twin::TwinParams{});
  // Hold-Off is expected at 26 °C, so always_wrong proposes On, which the
  // twin shows overshooting 28 °C.
  const EpisodeRecord e = loop.run_episode(HeaterAction::Off);
  EXPECT_FALSE(e.attempts[0].passed());
  EXPECT_TRUE(e.overridden);
}

TEST(RunLoop, TwinModeWithoutParamsIsConfigError) {
  SimulatedPlant plant({}, ClockMode::Lockstep);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(5.0));
  RunConfig cfg;
  cfg.validator_mode = ValidatorMode::Twin;
  EXPECT_THROW(ControlLoop(cfg, plant, backend, {}), ConfigError);
}

TEST(RunLoop, RealtimeClockUsesWallTime) {
  SimulatedPlant plant({}, ClockMode::Realtime);
  ScriptedBackend backend(ScriptedPolicy::oracle(), LatencyModel::fixed(0.1));
  RunConfig cfg;
  cfg.duration = 0.35;
  cfg.clock_mode = ClockMode::Realtime;
  ControlLoop loop(cfg, plant, backend, {});
  const auto start = std::chrono::steady_clock::now();
  const auto episodes = loop.run();
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(elapsed, 0.35);
  EXPECT_GE(episodes.size(), 3u);
  EXPECT_LE(episodes.size(), 4u);
}

TEST(RunConfigValidation, Rejections) {
  RunConfig cfg;
  cfg.duration = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_reprompts = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.sample_period_floor = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.monitor_mode = agents::MonitorMode::Anomaly;
  cfg.anomaly_margin = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.validator_mode = ValidatorMode::Twin;
  cfg.twin_validation.envelope = {30.0, 20.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
}
