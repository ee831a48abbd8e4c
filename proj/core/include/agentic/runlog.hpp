#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentic/orchestrator.hpp"

namespace agentic::orch {

// Line-delimited run log. The first line is a header carrying the run
// configuration, an optional description of the surrounding experiment,
// and a digest of both; each further line is one EpisodeRecord. Field order
// is fixed and timestamps/latencies are written with six decimals, so two
// identical runs produce byte-identical files.
inline constexpr std::string_view kRunLogFormat = "agentic-runlog/1";

nlohmann::ordered_json to_json(const RunConfig& config);

// Strict inverse of to_json (unknown keys rejected). Thresholds are read
// from a "thresholds" member when present. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, std::string path = "run");

std::string config_digest(std::string_view canonical);

std::string header_line(const RunConfig& config, const nlohmann::ordered_json& experiment);
std::string episode_to_line(const EpisodeRecord& episode);

// Throws LogFormatError (line 0) on missing or mistyped fields.
EpisodeRecord episode_from_json(const nlohmann::json& j);

// Writes the header on construction and flushes after every episode.
class RunLogWriter final : public EpisodeSink {
 public:
  // Throws IoError.
  RunLogWriter(const std::filesystem::path& path, const RunConfig& config,
               const nlohmann::ordered_json& experiment = nlohmann::ordered_json::object());

  void write(const EpisodeRecord& episode) override;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void put(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
};

struct RunLog {
  RunConfig config;
  nlohmann::json experiment;
  std::string digest;
  std::vector<EpisodeRecord> episodes;
};

// Throws LogFormatError naming the 1-based line.
RunLog parse_run_log(std::istream& in);
RunLog read_run_log(const std::filesystem::path& path);

}  // namespace agentic::orch
