#include "commands.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "agentic/backends.hpp"
#include "agentic/config.hpp"
#include "agentic/errors.hpp"
#include "agentic/format.hpp"
#include "agentic/metrics.hpp"
#include "agentic/orchestrator.hpp"
#include "agentic/plantio.hpp"
#include "agentic/runlog.hpp"
#include "agentic/tcp.hpp"

namespace agentic::tools {
namespace {

std::unique_ptr<plantio::Plant> open_plant(const std::string& spec, const cli::ExperimentConfig& cfg) {
  if (spec == "sim") {
    return std::make_unique<plantio::SimulatedPlant>(cfg.twin, cfg.run.clock_mode);
  }
  if (spec.rfind("tcp:", 0) == 0) {
    const auto [host, port] = plantio::parse_endpoint(spec.substr(4));
    return std::make_unique<plantio::TcpPlant>(host, port, cfg.run.clock_mode);
  }
  throw ConfigError(fmt::format("--plant '{}' must be sim or tcp:<host:port>", spec));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out.flush()) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

int run_impl(const RunOptions& options) {
  cli::ExperimentConfig cfg = cli::load_config(options.config);
  if (options.duration) {
    cfg.run.duration = *options.duration;
    cfg.run.validate();
  }
  backends::BackendConfig backend =
      options.backend ? cli::resolve_backend_override(*options.backend, cfg) : cfg.operator_backend();
  if (options.seed) cli::apply_seed(backend, *options.seed);
  cli::check_runnable(cfg.run, backend);

  const std::filesystem::path log_path = options.out ? std::filesystem::path(*options.out) : cfg.output.log;
  std::optional<std::filesystem::path> transcript = cfg.output.transcript;
  if (options.record) transcript = *options.record;

  nlohmann::ordered_json experiment = cli::to_json(cfg);
  experiment.erase("output");
  experiment["operator_backend"] = cli::to_json(backend);
  experiment["plant"] = options.plant;

  std::unique_ptr<backends::Backend> engine = backends::make_backend(backend);
  if (transcript) {
    engine = std::make_unique<backends::RecordingBackend>(std::move(engine), *transcript);
  }
  std::unique_ptr<plantio::Plant> plant = open_plant(options.plant, cfg);

  orch::RunLogWriter writer(log_path, cfg.run, experiment);
  orch::ControlLoop loop(cfg.run, *plant, *engine, {cfg.operator_agent, cfg.operator_task}, cfg.twin);
  const std::vector<orch::EpisodeRecord> episodes = loop.run(&writer);

  if (cfg.output.points) write_text(*cfg.output.points, metrics::points_dump(episodes));
  const metrics::Report report = metrics::make_report(orch::read_run_log(log_path));
  fmt::print("{}", metrics::render_report(report, metrics::ReportFormat::Table));
  fmt::print("run log: {} ({} episodes)\n", log_path.string(), episodes.size());
  return kExitOk;
}

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

void install_signal_handlers() {
  struct sigaction action {};
  action.sa_handler = on_signal;
  sigemptyset(&action.sa_mask);
  sigaction(SIGINT, &action, nullptr);
  sigaction(SIGTERM, &action, nullptr);
  std::signal(SIGPIPE, SIG_IGN);
}

}  // namespace

int cmd_run(const RunOptions& options) {
  try {
    return run_impl(options);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const TemplateError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const PlantIoError& e) {
    fmt::print(stderr, "plant I/O error: {}\n", e.what());
    return kExitPlantIo;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
}

int cmd_plant_serve(const ServeOptions& options) {
  try {
    const twin::TwinParams params = options.params ? cli::load_twin_params(*options.params) : twin::TwinParams{};
    const auto mode = plantio::clock_mode_from_string(options.mode);
    if (!mode) throw ConfigError(fmt::format("--mode '{}' must be realtime or lockstep", options.mode));
    const auto [host, port] = plantio::parse_endpoint(options.listen);

    plantio::PlantServer plant(params, *mode);
    net::LineServer server([&plant](std::string_view line) { return plant.handle_command(line); });
    server.listen(host, port);
    install_signal_handlers();

    fmt::print("listening on {}:{} ({})\n", host, server.port(), plantio::to_string(*mode));
    std::fflush(stdout);
    server.serve(g_stop);

    const twin::TwinState s = plant.state();
    fmt::print("final state: clock={} s heater={} C sensor={} C duty={}%\n", fixed2(s.clock),
               fixed2(s.t_heater), fixed2(s.t_sensor), fixed2(plant.duty()));
    std::fflush(stdout);
    return kExitOk;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const PlantIoError& e) {
    fmt::print(stderr, "cannot serve: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
}

int cmd_report(const ReportOptions& options) {
  try {
    const orch::RunLog log = orch::read_run_log(options.log);
    metrics::ReportFormat format = metrics::ReportFormat::Table;
    if (options.format == "csv") format = metrics::ReportFormat::Csv;
    if (options.format == "machine") format = metrics::ReportFormat::Machine;
    const metrics::Report report = metrics::make_report(log);
    fmt::print("{}", metrics::render_report(report, format));
    if (options.points) write_text(*options.points, metrics::points_dump(log.episodes));
    return kExitOk;
  } catch (const LogFormatError& e) {
    fmt::print(stderr, "malformed run log '{}': {}\n", options.log, e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
}

}  // namespace agentic::tools
