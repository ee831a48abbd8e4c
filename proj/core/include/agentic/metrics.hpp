#pragma once

#include <span>
#include <string>
#include <string_view>

#include "agentic/agents.hpp"
#include "agentic/orchestrator.hpp"
#include "agentic/runlog.hpp"

namespace agentic::metrics {

// Decision accuracy over a run. An episode is a pass when its first
// attempt passed validation, a pass-after-reprompts when a later attempt
// passed, and an override when none did. Percentages are rounded half away
// from zero to two decimals.
struct AccuracyMetrics {
  long samples = 0;
  long passes = 0;
  long fails = 0;
  long pass_after_reprompts = 0;
  long overrides = 0;
  double accuracy_first_pass = 0.0;       // %
  double accuracy_with_reprompts = 0.0;   // %
};

// Control quality under a zero-order hold: the temperature sampled at an
// episode start holds until the next episode starts (the last one until
// the end of the run).
struct ControlMetrics {
  double avg_deviation = 0.0;  // °C, time-weighted |T - midpoint|
  double time_above = 0.0;     // s with T > high
  double time_below = 0.0;     // s with T < low
  double time_outside = 0.0;   // time_above + time_below
  double midpoint = 0.0;       // °C
};

struct ControlSample {
  double t;            // s
  double temperature;  // °C
};

// Throws InvalidInput when samples <= 0 or the counts are inconsistent.
AccuracyMetrics accuracy_from_counts(long samples, long passes, long pass_after_reprompts);

// Throws LogFormatError for an empty log.
AccuracyMetrics accuracy_metrics(std::span<const orch::EpisodeRecord> episodes);

// Throws LogFormatError when sample times decrease.
ControlMetrics control_metrics(std::span<const ControlSample> samples, const agents::Thresholds& th,
                               double run_duration);
ControlMetrics control_metrics(std::span<const orch::EpisodeRecord> episodes,
                               const agents::Thresholds& th, double run_duration);

struct Report {
  AccuracyMetrics accuracy;
  ControlMetrics control;
  agents::Thresholds thresholds;
  double duration = 0.0;
};

Report make_report(const orch::RunLog& log);

enum class ReportFormat { Table, Csv, Machine };

// csv: one header line (kCsvHeader) and one data line.
// machine: one JSON object with the csv column names as keys.
inline constexpr std::string_view kCsvHeader =
    "samples,passes,fails,pass_after_reprompts,overrides,accuracy_first_pass,"
    "accuracy_with_reprompts,avg_deviation,time_above,time_below,time_outside,midpoint,"
    "low,high,duration";

std::string render_report(const Report& report, ReportFormat format);

// Inverses of the csv and machine renderings (values as printed). Throw
// LogFormatError.
Report parse_csv_report(std::string_view text);
Report parse_machine_report(std::string_view text);

// "t,T,action" per episode: start time, sensed temperature, applied action.
std::string points_dump(std::span<const orch::EpisodeRecord> episodes);

}  // namespace agentic::metrics
