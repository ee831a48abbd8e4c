#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentic/agents.hpp"
#include "agentic/heater.hpp"

namespace agentic::backends {

// Inference time attached to scripted decisions. Lockstep runs advance the
// plant clock by it; realtime runs wait it out.
struct LatencyModel {
  enum class Kind { None, Fixed, Lognormal };

  Kind kind = Kind::None;
  double fixed_s = 0.0;
  double mu = 0.0;  // of ln(latency)
  double sigma = 0.0;
  std::uint64_t seed = 0;

  static LatencyModel none() { return {}; }
  static LatencyModel fixed(double seconds) { return {Kind::Fixed, seconds, 0.0, 0.0, 0}; }
  static LatencyModel lognormal(double mu, double sigma, std::uint64_t seed) {
    return {Kind::Lognormal, 0.0, mu, sigma, seed};
  }

  void validate() const;
};

class LatencySampler {
 public:
  explicit LatencySampler(const LatencyModel& model);
  double next();

 private:
  LatencyModel model_;
  std::mt19937_64 rng_;
  std::lognormal_distribution<double> lognormal_;
};

// Deterministic stand-in for a language model.
//   oracle       always answers the hysteresis rule
//   always_wrong always answers the opposite
//   flip         first attempt wrong with p_wrong_first; attempts that carry
//                feedback are right with p_correct_on_feedback
struct ScriptedPolicy {
  enum class Kind { Oracle, Flip, AlwaysWrong };

  Kind kind = Kind::Oracle;
  double p_wrong_first = 0.0;
  double p_correct_on_feedback = 1.0;
  std::uint64_t seed = 0;

  static ScriptedPolicy oracle() { return {}; }
  static ScriptedPolicy always_wrong() { return {Kind::AlwaysWrong, 0.0, 0.0, 0}; }
  static ScriptedPolicy flip(double p_wrong_first, double p_correct_on_feedback, std::uint64_t seed) {
    return {Kind::Flip, p_wrong_first, p_correct_on_feedback, seed};
  }

  void validate() const;
};

std::string_view to_string(ScriptedPolicy::Kind kind) noexcept;
std::optional<ScriptedPolicy::Kind> scripted_kind_from_string(std::string_view text) noexcept;

enum class BackendKind { Http, Scripted, Replay };

std::string_view to_string(BackendKind kind) noexcept;
std::optional<BackendKind> backend_kind_from_string(std::string_view text) noexcept;

struct BackendConfig {
  BackendKind kind = BackendKind::Scripted;
  // http
  std::string base_url;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 512;
  double timeout = 30.0;
  std::string api_key_env = "LLM_API_KEY";
  // scripted
  ScriptedPolicy script;
  // replay
  std::filesystem::path transcript_path;

  LatencyModel latency;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// One request/response round trip with a decision engine.
struct Exchange {
  std::string system_text;
  std::string user_text;
  std::string response_text;
  double latency = 0.0;  // s
  std::string model;
  double timestamp = 0.0;  // plant clock when the request was issued
  int retries = 0;
  // Non-empty when the exchange ended in a BackendError.
  std::string error;
  int error_status = 0;

  bool operator==(const Exchange&) const = default;
};

nlohmann::ordered_json to_json(const Exchange& exchange);
Exchange exchange_from_json(const nlohmann::json& j);

// Everything a backend may look at for one decision. Language-model
// backends read the prompt; scripted ones read the structured fields.
struct DecisionRequest {
  agents::Prompt prompt;
  double t_sensor = 0.0;
  HeaterAction prev = HeaterAction::Off;
  agents::Thresholds thresholds;
  bool has_feedback = false;
  double timestamp = 0.0;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Throws BackendError, ReplayExhausted.
  virtual Exchange complete(const DecisionRequest& request) = 0;

  // True when Exchange::latency is measured wall time that has already
  // elapsed; false when it is simulated and still has to be accounted for.
  virtual bool wall_clock_latency() const noexcept = 0;

  virtual std::string describe() const = 0;
};

// Pure decision of a scripted policy. Consumes one draw from `rng` per flip
// decision and none otherwise. Latency is left at zero.
Exchange scripted_complete(const ScriptedPolicy& policy, double t, HeaterAction prev,
                           const agents::Thresholds& th, bool has_feedback, std::mt19937_64& rng);

class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend(ScriptedPolicy policy, LatencyModel latency);

  Exchange complete(const DecisionRequest& request) override;
  bool wall_clock_latency() const noexcept override { return false; }
  std::string describe() const override;

 private:
  ScriptedPolicy policy_;
  std::mt19937_64 decisions_;
  LatencySampler latency_;
};

// Chat-completions client: POST {base_url}/v1/chat/completions with one
// system and one user message. Retries once on a transport failure; HTTP
// error statuses are not retried.
class HttpBackend final : public Backend {
 public:
  // Throws ConfigError when the API key variable is unset or empty.
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;

  Exchange complete(const DecisionRequest& request) override;
  bool wall_clock_latency() const noexcept override { return true; }
  std::string describe() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Appends exchanges to a transcript file, one JSON object per line,
// flushing after each.
class TranscriptWriter {
 public:
  // Throws IoError.
  explicit TranscriptWriter(const std::filesystem::path& path);
  void record(const Exchange& exchange);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Throws IoError for unreadable or malformed transcripts.
std::vector<Exchange> load_transcript(const std::filesystem::path& path);

// Serves recorded responses in order, regardless of the prompt.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::vector<Exchange> exchanges);
  explicit ReplayBackend(const std::filesystem::path& transcript);

  Exchange complete(const DecisionRequest& request) override;
  bool wall_clock_latency() const noexcept override { return false; }
  std::string describe() const override;

  std::size_t consumed() const noexcept { return next_; }
  std::size_t size() const noexcept { return exchanges_.size(); }

 private:
  std::vector<Exchange> exchanges_;
  std::size_t next_ = 0;
};

// Records every exchange of the wrapped backend, failed ones included.
class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, const std::filesystem::path& transcript);

  Exchange complete(const DecisionRequest& request) override;
  bool wall_clock_latency() const noexcept override { return inner_->wall_clock_latency(); }
  std::string describe() const override { return inner_->describe(); }

 private:
  std::unique_ptr<Backend> inner_;
  TranscriptWriter writer_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

// Emulation profiles: scripted flip policies and fixed latencies matching
// the accuracy and sampling behaviour measured for four hosted models over
// a 2400 s run. Names: gpt-3.5, gpt-4o-mini, gpt-4o, gpt-4.
struct EmulationProfile {
  std::string_view name;
  double latency_s;
  double p_wrong_first;
  double p_correct_on_feedback;
};

std::optional<EmulationProfile> emulation_profile(std::string_view name);
const std::vector<EmulationProfile>& emulation_profiles();

}  // namespace agentic::backends
