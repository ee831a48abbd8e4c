#include "agentic/backends.hpp"

#include <cmath>

#include <fmt/format.h>

#include "agentic/errors.hpp"
#include "agentic/format.hpp"

namespace agentic::backends {
namespace {

// 53-bit uniform in [0, 1); independent of the standard library's
// distribution implementations so decision streams are portable.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

std::string action_line(HeaterAction action) { return fmt::format("ACTION: {}", to_string(action)); }

}  // namespace

// --- latency -----------------------------------------------------------------

void LatencyModel::validate() const {
  switch (kind) {
    case Kind::None:
      return;
    case Kind::Fixed:
      if (!std::isfinite(fixed_s) || fixed_s < 0.0) {
        throw ConfigError(fmt::format("latency.seconds must be finite and >= 0 (got {})", fixed_s));
      }
      return;
    case Kind::Lognormal:
      if (!std::isfinite(mu)) throw ConfigError("latency.mu must be finite");
      if (!std::isfinite(sigma) || sigma < 0.0) {
        throw ConfigError(fmt::format("latency.sigma must be finite and >= 0 (got {})", sigma));
      }
      return;
  }
}

LatencySampler::LatencySampler(const LatencyModel& model)
    : model_(model),
      rng_(model.seed),
      lognormal_(model.mu, model.kind == LatencyModel::Kind::Lognormal ? model.sigma : 1.0) {
  model_.validate();
}

double LatencySampler::next() {
  switch (model_.kind) {
    case LatencyModel::Kind::None:
      return 0.0;
    case LatencyModel::Kind::Fixed:
      return model_.fixed_s;
    case LatencyModel::Kind::Lognormal:
      return lognormal_(rng_);
  }
  return 0.0;
}

// --- scripted ----------------------------------------------------------------

void ScriptedPolicy::validate() const {
  if (kind != Kind::Flip) return;
  if (!probability(p_wrong_first)) {
    throw ConfigError(fmt::format("script.p_wrong_first must lie in [0, 1] (got {})", p_wrong_first));
  }
  if (!probability(p_correct_on_feedback)) {
    throw ConfigError(fmt::format("script.p_correct_on_feedback must lie in [0, 1] (got {})",
                                  p_correct_on_feedback));
  }
}

std::string_view to_string(ScriptedPolicy::Kind kind) noexcept {
  switch (kind) {
    case ScriptedPolicy::Kind::Oracle:
      return "oracle";
    case ScriptedPolicy::Kind::Flip:
      return "flip";
    case ScriptedPolicy::Kind::AlwaysWrong:
      return "always_wrong";
  }
  return "oracle";
}

std::optional<ScriptedPolicy::Kind> scripted_kind_from_string(std::string_view text) noexcept {
  if (text == "oracle") return ScriptedPolicy::Kind::Oracle;
  if (text == "flip") return ScriptedPolicy::Kind::Flip;
  if (text == "always_wrong") return ScriptedPolicy::Kind::AlwaysWrong;
  return std::nullopt;
}

Exchange scripted_complete(const ScriptedPolicy& policy, double t, HeaterAction prev,
                           const agents::Thresholds& th, bool has_feedback, std::mt19937_64& rng) {
  const HeaterAction right = agents::expected_action(t, prev, th);
  HeaterAction answer = right;
  switch (policy.kind) {
    case ScriptedPolicy::Kind::Oracle:
      break;
    case ScriptedPolicy::Kind::AlwaysWrong:
      answer = opposite(right);
      break;
    case ScriptedPolicy::Kind::Flip: {
      const double u = uniform01(rng);
      const bool correct = has_feedback ? u < policy.p_correct_on_feedback : !(u < policy.p_wrong_first);
      answer = correct ? right : opposite(right);
      break;
    }
  }
  Exchange ex;
  ex.response_text = action_line(answer);
  ex.model = fmt::format("scripted:{}", to_string(policy.kind));
  return ex;
}

ScriptedBackend::ScriptedBackend(ScriptedPolicy policy, LatencyModel latency)
    : policy_(policy), decisions_(policy.seed), latency_(latency) {
  policy_.validate();
}

Exchange ScriptedBackend::complete(const DecisionRequest& request) {
  Exchange ex = scripted_complete(policy_, request.t_sensor, request.prev, request.thresholds,
                                  request.has_feedback, decisions_);
  ex.system_text = request.prompt.system_text;
  ex.user_text = request.prompt.user_text;
  ex.timestamp = request.timestamp;
  ex.latency = latency_.next();
  return ex;
}

std::string ScriptedBackend::describe() const {
  if (policy_.kind == ScriptedPolicy::Kind::Flip) {
    return fmt::format("scripted:flip(p_wrong_first={}, p_correct_on_feedback={}, seed={})",
                       policy_.p_wrong_first, policy_.p_correct_on_feedback, policy_.seed);
  }
  return fmt::format("scripted:{}", to_string(policy_.kind));
}

// --- config ------------------------------------------------------------------

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::Http:
      return "http";
    case BackendKind::Scripted:
      return "scripted";
    case BackendKind::Replay:
      return "replay";
  }
  return "scripted";
}

std::optional<BackendKind> backend_kind_from_string(std::string_view text) noexcept {
  if (text == "http") return BackendKind::Http;
  if (text == "scripted") return BackendKind::Scripted;
  if (text == "replay") return BackendKind::Replay;
  return std::nullopt;
}

void BackendConfig::validate() const {
  if (!std::isfinite(timeout) || timeout <= 0.0) {
    throw ConfigError(fmt::format("backend.timeout must be > 0 (got {})", timeout));
  }
  latency.validate();
  switch (kind) {
    case BackendKind::Http:
      if (base_url.empty()) throw ConfigError("backend.base_url is required for http backends");
      if (base_url.find("://") == std::string::npos) {
        throw ConfigError(fmt::format("backend.base_url '{}' needs a scheme", base_url));
      }
      if (model.empty()) throw ConfigError("backend.model is required for http backends");
      if (!std::isfinite(temperature) || temperature < 0.0) {
        throw ConfigError("backend.temperature must be >= 0");
      }
      if (max_tokens <= 0) throw ConfigError("backend.max_tokens must be positive");
      if (api_key_env.empty()) throw ConfigError("backend.api_key_env must not be empty");
      return;
    case BackendKind::Scripted:
      script.validate();
      return;
    case BackendKind::Replay:
      if (transcript_path.empty()) {
        throw ConfigError("backend.transcript_path is required for replay backends");
      }
      return;
  }
}

// --- transcripts -------------------------------------------------------------

nlohmann::ordered_json to_json(const Exchange& ex) {
  nlohmann::ordered_json j;
  j["type"] = "exchange";
  j["timestamp"] = ex.timestamp;
  j["model"] = ex.model;
  j["latency"] = ex.latency;
  j["retries"] = ex.retries;
  j["system_text"] = ex.system_text;
  j["user_text"] = ex.user_text;
  j["response_text"] = ex.response_text;
  j["error"] = ex.error;
  j["error_status"] = ex.error_status;
  return j;
}

Exchange exchange_from_json(const nlohmann::json& j) {
  Exchange ex;
  ex.timestamp = j.at("timestamp").get<double>();
  ex.model = j.at("model").get<std::string>();
  ex.latency = j.at("latency").get<double>();
  ex.retries = j.value("retries", 0);
  ex.system_text = j.value("system_text", "");
  ex.user_text = j.value("user_text", "");
  ex.response_text = j.at("response_text").get<std::string>();
  ex.error = j.value("error", "");
  ex.error_status = j.value("error_status", 0);
  if (!std::isfinite(ex.latency) || ex.latency < 0.0) {
    throw IoError("exchange latency must be finite and >= 0");
  }
  return ex;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw IoError(fmt::format("cannot open transcript '{}' for writing", path.string()));
}

void TranscriptWriter::record(const Exchange& exchange) {
  out_ << to_json(exchange).dump() << '\n';
  out_.flush();
  if (!out_) throw IoError(fmt::format("failed writing transcript '{}'", path_.string()));
}

std::vector<Exchange> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read transcript '{}'", path.string()));
  std::vector<Exchange> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(exchange_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(fmt::format("{}:{}: malformed exchange: {}", path.string(), line_no, e.what()));
    } catch (const IoError& e) {
      throw IoError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

// --- replay ------------------------------------------------------------------

ReplayBackend::ReplayBackend(std::vector<Exchange> exchanges) : exchanges_(std::move(exchanges)) {}

ReplayBackend::ReplayBackend(const std::filesystem::path& transcript)
    : ReplayBackend(load_transcript(transcript)) {}

Exchange ReplayBackend::complete(const DecisionRequest& request) {
  if (next_ >= exchanges_.size()) {
    throw ReplayExhausted(
        fmt::format("replay transcript exhausted after {} exchanges", exchanges_.size()));
  }
  const Exchange& recorded = exchanges_[next_++];
  if (!recorded.error.empty()) {
    const auto kind = recorded.error_status != 0 ? BackendError::Kind::Status
                                                 : BackendError::Kind::Transport;
    throw BackendError(kind, recorded.error_status, recorded.error, recorded.latency);
  }
  Exchange ex = recorded;
  ex.system_text = request.prompt.system_text;
  ex.user_text = request.prompt.user_text;
  ex.timestamp = request.timestamp;
  return ex;
}

std::string ReplayBackend::describe() const {
  return fmt::format("replay({} exchanges)", exchanges_.size());
}

// --- recording ---------------------------------------------------------------

RecordingBackend::RecordingBackend(std::unique_ptr<Backend> inner,
                                   const std::filesystem::path& transcript)
    : inner_(std::move(inner)), writer_(transcript) {}

Exchange RecordingBackend::complete(const DecisionRequest& request) {
  try {
    Exchange ex = inner_->complete(request);
    writer_.record(ex);
    return ex;
  } catch (const BackendError& e) {
    Exchange failed;
    failed.system_text = request.prompt.system_text;
    failed.user_text = request.prompt.user_text;
    failed.timestamp = request.timestamp;
    failed.latency = e.latency();
    failed.error = e.what();
    failed.error_status = e.status();
    writer_.record(failed);
    throw;
  }
}

// --- factory -----------------------------------------------------------------

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  switch (config.kind) {
    case BackendKind::Http:
      return std::make_unique<HttpBackend>(config);
    case BackendKind::Scripted:
      return std::make_unique<ScriptedBackend>(config.script, config.latency);
    case BackendKind::Replay:
      return std::make_unique<ReplayBackend>(config.transcript_path);
  }
  throw ConfigError("unknown backend kind");
}

// --- emulation profiles ------------------------------------------------------

const std::vector<EmulationProfile>& emulation_profiles() {
  // Samples collected in a 2400 s run and first-pass / with-reprompt
  // accuracy (%), single reprompt.
  struct Measured {
    std::string_view name;
    double samples;
    double first_pass;
    double with_reprompts;
  };
  static const std::vector<EmulationProfile> profiles = [] {
    constexpr Measured measured[] = {
        {"gpt-3.5", 423, 60.04, 85.34},
        {"gpt-4o-mini", 394, 72.49, 89.97},
        {"gpt-4o", 554, 99.63, 99.81},
        {"gpt-4", 128, 93.75, 96.09},
    };
    std::vector<EmulationProfile> out;
    for (const auto& m : measured) {
      const double p_wrong = 1.0 - m.first_pass / 100.0;
      out.push_back({m.name, 2400.0 / m.samples, p_wrong,
                     (m.with_reprompts - m.first_pass) / (100.0 - m.first_pass)});
    }
    return out;
  }();
  return profiles;
}

std::optional<EmulationProfile> emulation_profile(std::string_view name) {
  for (const auto& p : emulation_profiles()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace agentic::backends
