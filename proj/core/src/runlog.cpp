#include "agentic/runlog.hpp"

#include <cinttypes>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "agentic/errors.hpp"
#include "agentic/format.hpp"
#include "agentic/json_fields.hpp"

namespace agentic::orch {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string json_quote(std::string_view text) { return json(std::string(text)).dump(); }

std::string action_text(HeaterAction a) { return json_quote(to_string(a)); }

std::string optional_text(const std::optional<std::string>& text) {
  return text ? json_quote(*text) : std::string("null");
}

json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double bound_from(const json& v, double infinite) {
  if (v.is_null()) return infinite;
  if (!v.is_number()) throw ConfigError("run.validator.envelope bounds must be numbers or null");
  return v.get<double>();
}

HeaterAction action_from(const json& v, std::string_view what) {
  if (!v.is_string()) throw LogFormatError(0, fmt::format("{} must be \"ON\" or \"OFF\"", what));
  const auto action = heater_action_from_string(v.get<std::string>());
  if (!action) throw LogFormatError(0, fmt::format("{} must be \"ON\" or \"OFF\"", what));
  return *action;
}

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw LogFormatError(0, fmt::format("missing field '{}'", key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw LogFormatError(0, fmt::format("field '{}' has the wrong type", key));
  }
}

}  // namespace

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["duration"] = c.duration;
  j["max_reprompts"] = c.max_reprompts;
  j["sample_period_floor"] = c.sample_period_floor;
  j["thresholds"] = {{"low", c.thresholds.low}, {"high", c.thresholds.high}};
  ordered_json validator;
  validator["mode"] = to_string(c.validator_mode);
  if (c.validator_mode == ValidatorMode::Twin) {
    validator["horizon"] = c.twin_validation.horizon;
    validator["envelope"] = {bound(c.twin_validation.envelope.min),
                             bound(c.twin_validation.envelope.max)};
  }
  j["validator"] = validator;
  ordered_json monitor;
  monitor["mode"] = to_string(c.monitor_mode);
  if (c.monitor_mode == agents::MonitorMode::Anomaly) {
    monitor["margin"] = c.anomaly_margin;
    monitor["period"] = c.monitor_period;
  }
  j["monitor"] = monitor;
  j["clock_mode"] = plantio::to_string(c.clock_mode);
  j["initial_action"] = to_string(c.initial_action);
  j["safe_action_policy"] = to_string(c.safe_action_policy);
  return j;
}

RunConfig run_config_from_json(const json& j, std::string path) {
  FieldReader r(j, std::move(path));
  RunConfig c;
  c.duration = r.number("duration", c.duration);
  c.max_reprompts = static_cast<int>(r.integer("max_reprompts", c.max_reprompts));
  c.sample_period_floor = r.number("sample_period_floor", c.sample_period_floor);
  if (r.has("thresholds")) {
    FieldReader t = r.object("thresholds");
    c.thresholds.low = t.number("low", c.thresholds.low);
    c.thresholds.high = t.number("high", c.thresholds.high);
    t.finish();
  }
  if (r.has("validator")) {
    FieldReader v = r.object("validator");
    const std::string mode = v.text("mode", "rule");
    if (mode == "rule") {
      c.validator_mode = ValidatorMode::Rule;
    } else if (mode == "twin") {
      c.validator_mode = ValidatorMode::Twin;
      c.twin_validation.horizon = v.number("horizon", c.twin_validation.horizon);
      if (v.has("envelope")) {
        const json& env = v.raw("envelope");
        if (!env.is_array() || env.size() != 2) {
          throw ConfigError(fmt::format("'{}' must be [min, max]", v.key_path("envelope")));
        }
        c.twin_validation.envelope = {bound_from(env[0], -std::numeric_limits<double>::infinity()),
                                      bound_from(env[1], std::numeric_limits<double>::infinity())};
      }
    } else {
      throw ConfigError(fmt::format("'{}' must be \"rule\" or \"twin\"", v.key_path("mode")));
    }
    v.finish();
  }
  if (r.has("monitor")) {
    FieldReader m = r.object("monitor");
    const std::string mode = m.text("mode", "continuous");
    if (mode == "continuous") {
      c.monitor_mode = agents::MonitorMode::Continuous;
    } else if (mode == "anomaly") {
      c.monitor_mode = agents::MonitorMode::Anomaly;
      c.anomaly_margin = m.number("margin", c.anomaly_margin);
      c.monitor_period = m.number("period", c.monitor_period);
    } else {
      throw ConfigError(
          fmt::format("'{}' must be \"continuous\" or \"anomaly\"", m.key_path("mode")));
    }
    m.finish();
  }
  if (r.has("clock_mode")) {
    const auto mode = plantio::clock_mode_from_string(r.text("clock_mode"));
    if (!mode) {
      throw ConfigError(fmt::format("'{}' must be \"lockstep\" or \"realtime\"", r.key_path("clock_mode")));
    }
    c.clock_mode = *mode;
  }
  if (r.has("initial_action")) {
    const auto action = heater_action_from_string(r.text("initial_action"));
    if (!action) {
      throw ConfigError(fmt::format("'{}' must be \"ON\" or \"OFF\"", r.key_path("initial_action")));
    }
    c.initial_action = *action;
  }
  if (r.has("safe_action_policy")) {
    const std::string policy = r.text("safe_action_policy");
    if (policy == "expected_rule") {
      c.safe_action_policy = SafeActionPolicy::ExpectedRule;
    } else if (policy == "force_off") {
      c.safe_action_policy = SafeActionPolicy::ForceOff;
    } else {
      throw ConfigError(fmt::format("'{}' must be \"expected_rule\" or \"force_off\"",
                                    r.key_path("safe_action_policy")));
    }
  }
  r.finish();
  c.validate();
  return c;
}

std::string config_digest(std::string_view canonical) {
  // FNV-1a, 64 bit.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("fnv1a64:{:016x}", hash);
}

std::string header_line(const RunConfig& config, const ordered_json& experiment) {
  ordered_json body;
  body["run"] = to_json(config);
  body["experiment"] = experiment;
  ordered_json header;
  header["type"] = "header";
  header["format"] = kRunLogFormat;
  header["run"] = body["run"];
  header["experiment"] = experiment;
  header["config_digest"] = config_digest(body.dump());
  return header.dump();
}

std::string episode_to_line(const EpisodeRecord& ep) {
  std::string out = fmt::format(
      R"({{"type":"episode","index":{},"t_start":{},"t_sensor":{},"prev_action":{},"attempts":[)",
      ep.index, fixed6(ep.t_start), fixed2(ep.t_sensor), action_text(ep.prev_action));
  for (std::size_t i = 0; i < ep.attempts.size(); ++i) {
    const AttemptRecord& a = ep.attempts[i];
    if (i > 0) out += ',';
    std::string verdict = "null";
    if (a.verdict) {
      verdict = fmt::format(R"({{"passed":{},"expected":{},"reason":{}}})",
                            a.verdict->passed ? "true" : "false",
                            a.verdict->expected ? action_text(*a.verdict->expected) : "null",
                            json_quote(a.verdict->reason));
    }
    out += fmt::format(
        R"({{"attempt_index":{},"feedback":{},"raw_response":{},"parsed":{},"verdict":{},"backend_error":{},"latency":{}}})",
        a.attempt_index, optional_text(a.feedback), json_quote(a.raw_response),
        a.parsed ? action_text(*a.parsed) : "null", verdict,
        a.backend_error.empty() ? std::string("null") : json_quote(a.backend_error), fixed6(a.latency));
  }
  out += fmt::format(R"(],"applied":{},"override":{},"t_end":{}}})", action_text(ep.applied),
                     ep.overridden ? "true" : "false", fixed6(ep.t_end));
  return out;
}

EpisodeRecord episode_from_json(const json& j) {
  if (!j.is_object()) throw LogFormatError(0, "episode must be an object");
  EpisodeRecord ep;
  ep.index = field<int>(j, "index");
  ep.t_start = field<double>(j, "t_start");
  ep.t_sensor = field<double>(j, "t_sensor");
  ep.prev_action = action_from(j.at("prev_action"), "prev_action");
  ep.applied = action_from(field<json>(j, "applied"), "applied");
  ep.overridden = field<bool>(j, "override");
  ep.t_end = field<double>(j, "t_end");
  const json attempts = field<json>(j, "attempts");
  if (!attempts.is_array() || attempts.empty()) {
    throw LogFormatError(0, "attempts must be a non-empty array");
  }
  for (const json& a : attempts) {
    if (!a.is_object()) throw LogFormatError(0, "attempt must be an object");
    AttemptRecord rec;
    rec.attempt_index = field<int>(a, "attempt_index");
    const json feedback = field<json>(a, "feedback");
    if (!feedback.is_null()) rec.feedback = field<std::string>(a, "feedback");
    rec.raw_response = field<std::string>(a, "raw_response");
    const json parsed = field<json>(a, "parsed");
    if (!parsed.is_null()) rec.parsed = action_from(parsed, "parsed");
    const json verdict = field<json>(a, "verdict");
    if (!verdict.is_null()) {
      agents::Verdict v;
      v.passed = field<bool>(verdict, "passed");
      const json expected = field<json>(verdict, "expected");
      if (!expected.is_null()) v.expected = action_from(expected, "expected");
      v.reason = field<std::string>(verdict, "reason");
      rec.verdict = std::move(v);
    }
    const json error = field<json>(a, "backend_error");
    if (!error.is_null()) rec.backend_error = field<std::string>(a, "backend_error");
    rec.latency = field<double>(a, "latency");
    ep.attempts.push_back(std::move(rec));
  }
  return ep;
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path, const RunConfig& config,
                           const ordered_json& experiment)
    : path_(path), out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw IoError(fmt::format("cannot open run log '{}' for writing", path.string()));
  put(header_line(config, experiment));
}

void RunLogWriter::put(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError(fmt::format("failed writing run log '{}'", path_.string()));
}

void RunLogWriter::write(const EpisodeRecord& episode) { put(episode_to_line(episode)); }

RunLog parse_run_log(std::istream& in) {
  RunLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw LogFormatError(line_no, fmt::format("not valid JSON: {}", e.what()));
    }
    try {
      const std::string type = j.is_object() ? j.value("type", "") : "";
      if (!have_header) {
        if (type != "header") throw LogFormatError(0, "first record must be the run header");
        if (j.value("format", "") != kRunLogFormat) {
          throw LogFormatError(0, fmt::format("unsupported log format (expected {})", kRunLogFormat));
        }
        log.config = run_config_from_json(j.at("run"));
        log.experiment = j.value("experiment", json::object());
        log.digest = j.value("config_digest", "");
        have_header = true;
        continue;
      }
      if (type != "episode") throw LogFormatError(0, fmt::format("unexpected record type '{}'", type));
      EpisodeRecord ep = episode_from_json(j);
      if (ep.index != static_cast<int>(log.episodes.size())) {
        throw LogFormatError(0, fmt::format("episode index {} out of sequence", ep.index));
      }
      log.episodes.push_back(std::move(ep));
    } catch (const LogFormatError& e) {
      if (e.line() != 0) throw;
      throw LogFormatError(line_no, e.what());
    } catch (const Error& e) {
      throw LogFormatError(line_no, e.what());
    } catch (const json::exception& e) {
      throw LogFormatError(line_no, e.what());
    }
  }
  if (!have_header) throw LogFormatError(line_no == 0 ? 1 : line_no, "run log has no header");
  return log;
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read run log '{}'", path.string()));
  return parse_run_log(in);
}

}  // namespace agentic::orch
