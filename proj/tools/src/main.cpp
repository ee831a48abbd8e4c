#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace agentic::tools;

  CLI::App app{"Agentic control-loop experiments on a simulated heater plant"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a control experiment and print its report");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--backend", run.backend,
                      "Backend override: <name>, scripted:oracle, scripted:always_wrong, "
                      "scripted:flip:<p>:<q>, scripted:profile:<name>, replay:<path>");
  run_cmd->add_option("--plant", run.plant, "sim or tcp:<host:port>")->capture_default_str();
  run_cmd->add_option("--duration", run.duration, "Run length in plant seconds");
  run_cmd->add_option("--out", run.out, "Run log path");
  run_cmd->add_option("--seed", run.seed, "Seed for scripted decisions and latencies");
  run_cmd->add_option("--record", run.record, "Write a replayable transcript here");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("plant-serve", "Serve the simulated plant over TCP");
  serve_cmd->add_option("--listen", serve.listen, "host:port (port 0 picks a free port)")
      ->capture_default_str();
  serve_cmd->add_option("--params", serve.params, "Twin parameter file (JSON)");
  serve_cmd->add_option("--mode", serve.mode, "realtime or lockstep")
      ->check(CLI::IsMember({"realtime", "lockstep"}))
      ->capture_default_str();

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Compute metrics from a run log");
  report_cmd->add_option("--log", report.log, "Run log path")->required();
  report_cmd->add_option("--format", report.format, "table, csv or machine")
      ->check(CLI::IsMember({"table", "csv", "machine"}))
      ->capture_default_str();
  report_cmd->add_option("--points", report.points, "Write t,T,action per episode here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) return cmd_run(run);
  if (*serve_cmd) return cmd_plant_serve(serve);
  return cmd_report(report);
}
