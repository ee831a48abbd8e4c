#include "agentic/metrics.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "agentic/errors.hpp"
#include "agentic/format.hpp"

namespace agentic::metrics {
namespace {

double percent(long part, long whole) {
  return round_half_away(100.0 * static_cast<double>(part) / static_cast<double>(whole), 2);
}

std::vector<std::string> csv_fields(const Report& r) {
  const auto& a = r.accuracy;
  const auto& c = r.control;
  return {
      std::to_string(a.samples),
      std::to_string(a.passes),
      std::to_string(a.fails),
      std::to_string(a.pass_after_reprompts),
      std::to_string(a.overrides),
      fixed2(a.accuracy_first_pass),
      fixed2(a.accuracy_with_reprompts),
      fixed2(c.avg_deviation),
      fixed2(c.time_above),
      fixed2(c.time_below),
      fixed2(c.time_outside),
      fixed2(c.midpoint),
      fixed2(r.thresholds.low),
      fixed2(r.thresholds.high),
      fixed2(r.duration),
  };
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

Report report_from_values(const std::vector<std::string>& names, const std::vector<double>& values) {
  const auto get = [&](std::string_view name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return values.at(i);
    }
    throw LogFormatError(0, fmt::format("report lacks field '{}'", name));
  };
  Report r;
  r.accuracy.samples = std::lround(get("samples"));
  r.accuracy.passes = std::lround(get("passes"));
  r.accuracy.fails = std::lround(get("fails"));
  r.accuracy.pass_after_reprompts = std::lround(get("pass_after_reprompts"));
  r.accuracy.overrides = std::lround(get("overrides"));
  r.accuracy.accuracy_first_pass = get("accuracy_first_pass");
  r.accuracy.accuracy_with_reprompts = get("accuracy_with_reprompts");
  r.control.avg_deviation = get("avg_deviation");
  r.control.time_above = get("time_above");
  r.control.time_below = get("time_below");
  r.control.time_outside = get("time_outside");
  r.control.midpoint = get("midpoint");
  r.thresholds.low = get("low");
  r.thresholds.high = get("high");
  r.duration = get("duration");
  return r;
}

}  // namespace

AccuracyMetrics accuracy_from_counts(long samples, long passes, long pass_after_reprompts) {
  if (samples <= 0) throw InvalidInput("accuracy needs at least one sample");
  if (passes < 0 || pass_after_reprompts < 0 || passes + pass_after_reprompts > samples) {
    throw InvalidInput("inconsistent accuracy counts");
  }
  AccuracyMetrics m;
  m.samples = samples;
  m.passes = passes;
  m.fails = samples - passes;
  m.pass_after_reprompts = pass_after_reprompts;
  m.overrides = m.fails - pass_after_reprompts;
  m.accuracy_first_pass = percent(passes, samples);
  m.accuracy_with_reprompts = percent(passes + pass_after_reprompts, samples);
  return m;
}

AccuracyMetrics accuracy_metrics(std::span<const orch::EpisodeRecord> episodes) {
  if (episodes.empty()) throw LogFormatError(0, "run log contains no episodes");
  long passes = 0;
  long rescued = 0;
  for (const auto& ep : episodes) {
    if (ep.attempts.empty()) throw LogFormatError(0, "episode without attempts");
    if (ep.attempts.front().passed()) {
      ++passes;
      continue;
    }
    for (std::size_t i = 1; i < ep.attempts.size(); ++i) {
      if (ep.attempts[i].passed()) {
        ++rescued;
        break;
      }
    }
  }
  return accuracy_from_counts(static_cast<long>(episodes.size()), passes, rescued);
}

ControlMetrics control_metrics(std::span<const ControlSample> samples, const agents::Thresholds& th,
                               double run_duration) {
  ControlMetrics m;
  m.midpoint = th.midpoint();
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i].t < samples[i - 1].t) {
      throw LogFormatError(0, fmt::format("sample times decrease at index {}", i));
    }
    const double end = i + 1 < samples.size() ? samples[i + 1].t : run_duration;
    const double span = std::max(0.0, std::min(end, run_duration) - std::max(samples[i].t, 0.0));
    const double temp = samples[i].temperature;
    if (temp > th.high) m.time_above += span;
    if (temp < th.low) m.time_below += span;
    weighted += std::abs(temp - m.midpoint) * span;
    total += span;
  }
  m.time_outside = m.time_above + m.time_below;
  m.avg_deviation = total > 0.0 ? weighted / total : 0.0;
  return m;
}

ControlMetrics control_metrics(std::span<const orch::EpisodeRecord> episodes,
                               const agents::Thresholds& th, double run_duration) {
  std::vector<ControlSample> samples;
  samples.reserve(episodes.size());
  for (const auto& ep : episodes) samples.push_back({ep.t_start, ep.t_sensor});
  return control_metrics(samples, th, run_duration);
}

Report make_report(const orch::RunLog& log) {
  Report r;
  r.thresholds = log.config.thresholds;
  r.duration = log.config.duration;
  r.accuracy = accuracy_metrics(log.episodes);
  r.control = control_metrics(log.episodes, r.thresholds, r.duration);
  return r;
}

std::string render_report(const Report& r, ReportFormat format) {
  const auto fields = csv_fields(r);
  switch (format) {
    case ReportFormat::Csv: {
      std::string out(kCsvHeader);
      out += '\n';
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out += ',';
        out += fields[i];
      }
      out += '\n';
      return out;
    }
    case ReportFormat::Machine: {
      // Numbers are emitted exactly as in the csv so the two agree.
      const auto names = split(kCsvHeader, ',');
      std::string out = "{";
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += ',';
        out += fmt::format("\"{}\":{}", names[i], fields[i]);
      }
      out += "}\n";
      return out;
    }
    case ReportFormat::Table:
      break;
  }

  const auto& a = r.accuracy;
  const auto& c = r.control;
  const std::string high = compact(r.thresholds.high);
  const std::string low = compact(r.thresholds.low);
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"Accuracy- first pass (%)", fixed2(a.accuracy_first_pass)},
      {"Accuracy - reprompts (%)", fixed2(a.accuracy_with_reprompts)},
      {"Samples", std::to_string(a.samples)},
      {"Passes", std::to_string(a.passes)},
      {"Fails", std::to_string(a.fails)},
      {"Pass after reprompts", std::to_string(a.pass_after_reprompts)},
      {"Safety overrides", std::to_string(a.overrides)},
      {"Average Deviation (C)", fixed2(c.avg_deviation)},
      {fmt::format("Time above {}C (s)", high), fixed2(c.time_above)},
      {fmt::format("Time below {}C (s)", low), fixed2(c.time_below)},
      {"Time outside range (s)", fixed2(c.time_outside)},
  };
  std::size_t width = 6;
  for (const auto& [label, value] : rows) width = std::max(width, label.size());
  std::string out = fmt::format("{:<{}} | {:>10}\n", "Metric", width, "Value");
  out += std::string(width, '-') + "-+-" + std::string(10, '-') + "\n";
  for (const auto& [label, value] : rows) out += fmt::format("{:<{}} | {:>10}\n", label, width, value);
  return out;
}

Report parse_csv_report(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  std::string data;
  if (!std::getline(in, header) || !std::getline(in, data)) {
    throw LogFormatError(0, "csv report needs a header and a data line");
  }
  const auto names = split(header, ',');
  const auto cells = split(data, ',');
  if (names.size() != cells.size()) throw LogFormatError(2, "csv column count mismatch");
  std::vector<double> values;
  for (const auto& cell : cells) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw LogFormatError(2, fmt::format("csv cell '{}' is not a number", cell));
    }
  }
  return report_from_values(names, values);
}

Report parse_machine_report(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LogFormatError(1, fmt::format("machine report is not JSON: {}", e.what()));
  }
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw LogFormatError(1, fmt::format("field '{}' is not a number", key));
    names.push_back(key);
    values.push_back(value.get<double>());
  }
  return report_from_values(names, values);
}

std::string points_dump(std::span<const orch::EpisodeRecord> episodes) {
  std::string out;
  for (const auto& ep : episodes) {
    out += fmt::format("{},{},{}\n", fixed6(ep.t_start), fixed2(ep.t_sensor), to_string(ep.applied));
  }
  return out;
}

}  // namespace agentic::metrics
