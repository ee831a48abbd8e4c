#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "agentic/agents.hpp"
#include "agentic/backends.hpp"
#include "agentic/orchestrator.hpp"
#include "agentic/twin.hpp"

namespace agentic::cli {

struct OutputPaths {
  std::filesystem::path log = "run.jsonl";
  std::optional<std::filesystem::path> transcript;
  std::optional<std::filesystem::path> points;
};

// One experiment: plant model, control band, agents, decision backends,
// loop settings and output locations. Loaded from a JSON document; see
// docs/case_study.json for the canonical example.
struct ExperimentConfig {
  twin::TwinParams twin;
  agents::Thresholds thresholds;
  agents::AgentSpec operator_agent = agents::default_operator_agent();
  agents::TaskSpec operator_task = agents::default_operator_task();
  agents::AgentSpec validator_agent = agents::default_validator_agent();
  agents::AgentSpec reprompter_agent = agents::default_reprompter_agent();
  std::map<std::string, backends::BackendConfig> backends;
  orch::RunConfig run;
  OutputPaths output;

  const backends::BackendConfig& operator_backend() const;
};

// Validates every section before returning. Throws ConfigError naming the
// offending key (or the path for unreadable files).
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const twin::TwinParams& params);
nlohmann::ordered_json to_json(const backends::BackendConfig& config);

twin::TwinParams twin_params_from_json(const nlohmann::json& j, std::string path = "twin");
backends::BackendConfig backend_from_json(const nlohmann::json& j, std::string path);

// Flat {"t_amb": ..., "alpha": ..., ...} document. Throws ConfigError.
twin::TwinParams load_twin_params(const std::filesystem::path& path);

// --backend override. Accepted forms:
//   <name>                   a backend declared in the config
//   scripted:oracle | scripted:always_wrong
//   scripted:flip:<p_wrong_first>:<p_correct_on_feedback>
//   scripted:profile:<gpt-3.5|gpt-4o-mini|gpt-4o|gpt-4>
//   replay:<transcript path>
// Scripted overrides keep the latency model of `base`.
backends::BackendConfig resolve_backend_override(std::string_view spec, const ExperimentConfig& config);

// Re-seeds the scripted policy and lognormal latency stream.
void apply_seed(backends::BackendConfig& backend, std::uint64_t seed);

// Rejects combinations that cannot terminate: a lockstep run whose decisions
// take no simulated time and has no sample-period floor.
void check_runnable(const orch::RunConfig& run, const backends::BackendConfig& backend);

}  // namespace agentic::cli
