#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace agentic::tools {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPlantIo = 3;

struct RunOptions {
  std::string config;
  std::optional<std::string> backend;
  std::string plant = "sim";
  std::optional<double> duration;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> record;
};

struct ServeOptions {
  std::string listen = "127.0.0.1:5555";
  std::optional<std::string> params;
  std::string mode = "realtime";
};

struct ReportOptions {
  std::string log;
  std::string format = "table";
  std::optional<std::string> points;
};

int cmd_run(const RunOptions& options);
int cmd_plant_serve(const ServeOptions& options);
int cmd_report(const ReportOptions& options);

}  // namespace agentic::tools
