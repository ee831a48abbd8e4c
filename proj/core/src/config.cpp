#include "agentic/config.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "agentic/errors.hpp"
#include "agentic/json_fields.hpp"
#include "agentic/runlog.hpp"

namespace agentic::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json read_json_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read {} '{}'", what, path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{} '{}' is not valid JSON: {}", what, path.string(), e.what()));
  }
}

std::vector<std::string> string_list(FieldReader& r, std::string_view key) {
  std::vector<std::string> out;
  if (!r.has(key)) return out;
  const json& list = r.raw(key);
  if (!list.is_array()) throw ConfigError(fmt::format("'{}' must be a list", r.key_path(key)));
  for (const auto& item : list) {
    if (!item.is_string()) {
      throw ConfigError(fmt::format("'{}' must contain strings", r.key_path(key)));
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

agents::AgentSpec agent_from_json(const json& j, const std::string& name, agents::AgentSpec base,
                                  std::optional<agents::TaskSpec>* task) {
  FieldReader r(j, "agents." + name);
  base.name = name;
  base.role = r.text("role", base.role);
  base.goal = r.text("goal", base.goal);
  base.backend = r.text("backend", base.backend);
  base.tools = string_list(r, "tools");
  if (task != nullptr && r.has("task")) {
    FieldReader t = r.object("task");
    agents::TaskSpec spec;
    spec.description_template = t.text("description_template");
    spec.expected_output_hint = t.text("expected_output_hint", "");
    t.finish();
    try {
      spec.validate();
    } catch (const TemplateError& e) {
      throw ConfigError(fmt::format("'{}': {}", t.key_path("description_template"), e.what()));
    }
    *task = spec;
  }
  r.finish();
  return base;
}

backends::LatencyModel latency_from_json(const json& j, const std::string& path) {
  FieldReader r(j, path);
  const std::string kind = r.text("kind", "none");
  backends::LatencyModel m;
  if (kind == "none") {
    m = backends::LatencyModel::none();
  } else if (kind == "fixed") {
    m = backends::LatencyModel::fixed(r.number("seconds"));
  } else if (kind == "lognormal") {
    m = backends::LatencyModel::lognormal(r.number("mu"), r.number("sigma"),
                                          static_cast<std::uint64_t>(r.integer("seed", 0)));
  } else {
    throw ConfigError(fmt::format("'{}' must be none, fixed or lognormal", r.key_path("kind")));
  }
  r.finish();
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return m;
}

ordered_json latency_to_json(const backends::LatencyModel& m) {
  using Kind = backends::LatencyModel::Kind;
  switch (m.kind) {
    case Kind::None:
      return {{"kind", "none"}};
    case Kind::Fixed:
      return {{"kind", "fixed"}, {"seconds", m.fixed_s}};
    case Kind::Lognormal:
      return {{"kind", "lognormal"}, {"mu", m.mu}, {"sigma", m.sigma}, {"seed", m.seed}};
  }
  return {{"kind", "none"}};
}

double parse_probability(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("--backend: {} '{}' is not a number", what, text));
  }
  return value;
}

}  // namespace

const backends::BackendConfig& ExperimentConfig::operator_backend() const {
  const auto it = backends.find(operator_agent.backend);
  if (it == backends.end()) {
    throw ConfigError(fmt::format("agents.operator.backend '{}' is not declared under backends",
                                  operator_agent.backend));
  }
  return it->second;
}

twin::TwinParams twin_params_from_json(const json& j, std::string path) {
  FieldReader r(j, std::move(path));
  twin::TwinParams p;
  p.t_amb = r.number("t_amb", p.t_amb);
  p.alpha = r.number("alpha", p.alpha);
  p.c_h = r.number("c_h", p.c_h);
  p.c_s = r.number("c_s", p.c_s);
  p.u_ha = r.number("u_ha", p.u_ha);
  p.u_hs = r.number("u_hs", p.u_hs);
  p.u_sa = r.number("u_sa", p.u_sa);
  p.dt_internal = r.number("dt_internal", p.dt_internal);
  r.finish();
  return p;
}

ordered_json to_json(const twin::TwinParams& p) {
  ordered_json j;
  j["t_amb"] = p.t_amb;
  j["alpha"] = p.alpha;
  j["c_h"] = p.c_h;
  j["c_s"] = p.c_s;
  j["u_ha"] = p.u_ha;
  j["u_hs"] = p.u_hs;
  j["u_sa"] = p.u_sa;
  j["dt_internal"] = p.dt_internal;
  return j;
}

backends::BackendConfig backend_from_json(const json& j, std::string path) {
  FieldReader r(j, path);
  backends::BackendConfig c;
  const std::string kind = r.text("kind");
  const auto parsed = backends::backend_kind_from_string(kind);
  if (!parsed) {
    throw ConfigError(fmt::format("'{}' must be http, scripted or replay", r.key_path("kind")));
  }
  c.kind = *parsed;
  c.timeout = r.number("timeout", c.timeout);
  if (r.has("latency")) c.latency = latency_from_json(r.raw("latency"), r.key_path("latency"));
  switch (c.kind) {
    case backends::BackendKind::Http:
      c.base_url = r.text("base_url");
      c.model = r.text("model");
      c.temperature = r.number("temperature", c.temperature);
      c.max_tokens = static_cast<int>(r.integer("max_tokens", c.max_tokens));
      c.api_key_env = r.text("api_key_env", c.api_key_env);
      break;
    case backends::BackendKind::Scripted: {
      FieldReader s = r.object("script");
      const auto policy = backends::scripted_kind_from_string(s.text("policy"));
      if (!policy) {
        throw ConfigError(
            fmt::format("'{}' must be oracle, flip or always_wrong", s.key_path("policy")));
      }
      c.script.kind = *policy;
      c.script.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
      if (c.script.kind == backends::ScriptedPolicy::Kind::Flip) {
        c.script.p_wrong_first = s.number("p_wrong_first");
        c.script.p_correct_on_feedback = s.number("p_correct_on_feedback");
      }
      s.finish();
      break;
    }
    case backends::BackendKind::Replay:
      c.transcript_path = r.text("transcript_path");
      break;
  }
  r.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return c;
}

ordered_json to_json(const backends::BackendConfig& c) {
  ordered_json j;
  j["kind"] = backends::to_string(c.kind);
  j["timeout"] = c.timeout;
  switch (c.kind) {
    case backends::BackendKind::Http:
      j["base_url"] = c.base_url;
      j["model"] = c.model;
      j["temperature"] = c.temperature;
      j["max_tokens"] = c.max_tokens;
      j["api_key_env"] = c.api_key_env;
      break;
    case backends::BackendKind::Scripted: {
      ordered_json s;
      s["policy"] = backends::to_string(c.script.kind);
      s["seed"] = c.script.seed;
      if (c.script.kind == backends::ScriptedPolicy::Kind::Flip) {
        s["p_wrong_first"] = c.script.p_wrong_first;
        s["p_correct_on_feedback"] = c.script.p_correct_on_feedback;
      }
      j["script"] = s;
      break;
    }
    case backends::BackendKind::Replay:
      j["transcript_path"] = c.transcript_path.string();
      break;
  }
  j["latency"] = latency_to_json(c.latency);
  return j;
}

ExperimentConfig parse_config(const json& document) {
  FieldReader root(document, "");
  ExperimentConfig cfg;

  if (root.has("thresholds")) {
    FieldReader t = root.object("thresholds");
    cfg.thresholds.low = t.number("low", cfg.thresholds.low);
    cfg.thresholds.high = t.number("high", cfg.thresholds.high);
    t.finish();
  }
  cfg.thresholds.validate();

  if (root.has("twin")) cfg.twin = twin_params_from_json(root.raw("twin"), "twin");
  cfg.twin.validate(cfg.thresholds.high);

  const json& backends_json = root.raw("backends");
  if (!backends_json.is_object() || backends_json.empty()) {
    throw ConfigError("'backends' must be a non-empty object");
  }
  for (const auto& [name, value] : backends_json.items()) {
    cfg.backends.emplace(name, backend_from_json(value, "backends." + name));
  }

  if (root.has("agents")) {
    FieldReader a = root.object("agents");
    std::optional<agents::TaskSpec> task;
    if (a.has("operator")) {
      cfg.operator_agent = agent_from_json(a.raw("operator"), "operator", cfg.operator_agent, &task);
      if (task) cfg.operator_task = *task;
    }
    if (a.has("validator")) {
      cfg.validator_agent = agent_from_json(a.raw("validator"), "validator", cfg.validator_agent, nullptr);
    }
    if (a.has("reprompter")) {
      cfg.reprompter_agent =
          agent_from_json(a.raw("reprompter"), "reprompter", cfg.reprompter_agent, nullptr);
    }
    a.finish();
  }
  for (const auto* agent : {&cfg.operator_agent, &cfg.validator_agent, &cfg.reprompter_agent}) {
    const bool required = agent == &cfg.operator_agent;
    if ((required || !agent->backend.empty()) && !cfg.backends.count(agent->backend)) {
      throw ConfigError(fmt::format("agents.{}.backend '{}' is not declared under backends",
                                    agent->name, agent->backend));
    }
  }

  if (root.has("run")) {
    const json& run = root.raw("run");
    if (run.is_object() && run.contains("thresholds")) {
      throw ConfigError("unknown key 'run.thresholds' (thresholds live at the top level)");
    }
    cfg.run = orch::run_config_from_json(run, "run");
  }
  cfg.run.thresholds = cfg.thresholds;
  cfg.run.validate();

  if (root.has("output")) {
    FieldReader o = root.object("output");
    cfg.output.log = o.text("log", cfg.output.log.string());
    if (o.has("transcript")) cfg.output.transcript = o.text("transcript");
    if (o.has("points")) cfg.output.points = o.text("points");
    o.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const json document = read_json_file(path, "config");
  try {
    return parse_config(document);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

ordered_json to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["twin"] = to_json(cfg.twin);
  j["thresholds"] = {{"low", cfg.thresholds.low}, {"high", cfg.thresholds.high}};
  ordered_json agents_json;
  const auto agent = [](const agents::AgentSpec& a) {
    ordered_json out;
    out["role"] = a.role;
    out["goal"] = a.goal;
    if (!a.backend.empty()) out["backend"] = a.backend;
    out["tools"] = a.tools;
    return out;
  };
  agents_json["operator"] = agent(cfg.operator_agent);
  agents_json["operator"]["task"] = {
      {"description_template", cfg.operator_task.description_template},
      {"expected_output_hint", cfg.operator_task.expected_output_hint}};
  agents_json["validator"] = agent(cfg.validator_agent);
  agents_json["reprompter"] = agent(cfg.reprompter_agent);
  j["agents"] = agents_json;
  ordered_json backends_json = ordered_json::object();
  for (const auto& [name, backend] : cfg.backends) backends_json[name] = to_json(backend);
  j["backends"] = backends_json;
  ordered_json run = orch::to_json(cfg.run);
  run.erase("thresholds");
  j["run"] = run;
  ordered_json output;
  output["log"] = cfg.output.log.string();
  if (cfg.output.transcript) output["transcript"] = cfg.output.transcript->string();
  if (cfg.output.points) output["points"] = cfg.output.points->string();
  j["output"] = output;
  return j;
}

twin::TwinParams load_twin_params(const std::filesystem::path& path) {
  const json document = read_json_file(path, "twin parameter file");
  try {
    twin::TwinParams params = twin_params_from_json(document, "");
    params.validate();
    return params;
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

backends::BackendConfig resolve_backend_override(std::string_view spec, const ExperimentConfig& config) {
  if (const auto it = config.backends.find(std::string(spec)); it != config.backends.end()) {
    return it->second;
  }
  backends::BackendConfig base = config.operator_backend();
  if (spec.rfind("replay:", 0) == 0) {
    backends::BackendConfig c;
    c.kind = backends::BackendKind::Replay;
    c.transcript_path = std::string(spec.substr(7));
    c.validate();
    return c;
  }
  if (spec.rfind("scripted:", 0) != 0) {
    throw ConfigError(fmt::format("--backend '{}' is neither a declared backend nor a "
                                  "scripted:/replay: override",
                                  spec));
  }
  const std::string_view rest = spec.substr(9);
  backends::BackendConfig c;
  c.kind = backends::BackendKind::Scripted;
  c.latency = base.latency;
  c.script.seed = base.kind == backends::BackendKind::Scripted ? base.script.seed : 0;
  if (rest == "oracle") {
    c.script.kind = backends::ScriptedPolicy::Kind::Oracle;
  } else if (rest == "always_wrong") {
    c.script.kind = backends::ScriptedPolicy::Kind::AlwaysWrong;
  } else if (rest.rfind("flip:", 0) == 0) {
    const std::string_view probs = rest.substr(5);
    const std::size_t colon = probs.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("--backend scripted:flip needs <p_wrong_first>:<p_correct_on_feedback>");
    }
    c.script.kind = backends::ScriptedPolicy::Kind::Flip;
    c.script.p_wrong_first = parse_probability(probs.substr(0, colon), "p_wrong_first");
    c.script.p_correct_on_feedback = parse_probability(probs.substr(colon + 1), "p_correct_on_feedback");
  } else if (rest.rfind("profile:", 0) == 0) {
    const auto profile = backends::emulation_profile(rest.substr(8));
    if (!profile) throw ConfigError(fmt::format("--backend: unknown profile '{}'", rest.substr(8)));
    c.script.kind = backends::ScriptedPolicy::Kind::Flip;
    c.script.p_wrong_first = profile->p_wrong_first;
    c.script.p_correct_on_feedback = profile->p_correct_on_feedback;
    c.latency = backends::LatencyModel::fixed(profile->latency_s);
  } else {
    throw ConfigError(fmt::format("--backend: unknown scripted policy '{}'", rest));
  }
  c.validate();
  return c;
}

void apply_seed(backends::BackendConfig& backend, std::uint64_t seed) {
  backend.script.seed = seed;
  // Separate stream for latencies so they never correlate with decisions.
  backend.latency.seed = seed ^ 0x9e3779b97f4a7c15ULL;
}

void check_runnable(const orch::RunConfig& run, const backends::BackendConfig& backend) {
  const bool zero_latency = backend.kind == backends::BackendKind::Scripted &&
                            backend.latency.kind == backends::LatencyModel::Kind::None;
  if (run.clock_mode == plantio::ClockMode::Lockstep && zero_latency &&
      run.sample_period_floor <= 0.0) {
    throw ConfigError(
        "run.sample_period_floor must be > 0 when a lockstep run uses a scripted backend "
        "without latency (the clock would never advance)");
  }
}

}  // namespace agentic::cli
