#include "agentic/plantio.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "agentic/errors.hpp"
#include "agentic/format.hpp"
#include "agentic/tcp.hpp"

namespace agentic {

std::string_view to_string(HeaterAction action) noexcept {
  return action == HeaterAction::On ? "ON" : "OFF";
}

std::optional<HeaterAction> heater_action_from_string(std::string_view text) noexcept {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ON") return HeaterAction::On;
  if (upper == "OFF") return HeaterAction::Off;
  return std::nullopt;
}

}  // namespace agentic

namespace agentic::plantio {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

std::optional<double> parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void wait_seconds(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace

std::string_view to_string(ClockMode mode) noexcept {
  return mode == ClockMode::Lockstep ? "lockstep" : "realtime";
}

std::optional<ClockMode> clock_mode_from_string(std::string_view text) noexcept {
  if (text == "lockstep") return ClockMode::Lockstep;
  if (text == "realtime") return ClockMode::Realtime;
  return std::nullopt;
}

double quantize_temperature(double celsius) { return round_half_away(celsius, 2); }

std::string format_temperature(double celsius) { return fixed2(celsius); }

// --- SimulatedPlant ----------------------------------------------------------

SimulatedPlant::SimulatedPlant(twin::TwinParams params, ClockMode mode)
    : SimulatedPlant(params, mode, twin::ambient_state(params)) {}

SimulatedPlant::SimulatedPlant(twin::TwinParams params, ClockMode mode, twin::TwinState initial)
    : params_(params), mode_(mode), state_(initial), wall_start_(std::chrono::steady_clock::now()) {}

void SimulatedPlant::sync_to_wall() {
  if (mode_ != ClockMode::Realtime) return;
  const double target = seconds_since(wall_start_);
  if (target > state_.clock) state_ = twin::step(params_, state_, duty_, target - state_.clock);
}

PlantSample SimulatedPlant::read_temperature() {
  sync_to_wall();
  return {state_.clock, quantize_temperature(state_.t_sensor), applied_};
}

void SimulatedPlant::apply_heater(HeaterAction action) {
  if (action == applied_ && duty_ == duty_of(action)) return;
  set_duty(duty_of(action));
  applied_ = action;
}

void SimulatedPlant::advance(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    throw InvalidInput(fmt::format("cannot advance plant by {} s", seconds));
  }
  if (mode_ == ClockMode::Realtime) {
    wait_seconds(seconds);
    sync_to_wall();
    return;
  }
  if (seconds > 0.0) state_ = twin::step(params_, state_, duty_, seconds);
}

double SimulatedPlant::clock() {
  sync_to_wall();
  return state_.clock;
}

double SimulatedPlant::set_duty(double duty) {
  sync_to_wall();
  duty_ = std::clamp(duty, 0.0, 100.0);
  applied_ = duty_ > 0.0 ? HeaterAction::On : HeaterAction::Off;
  return duty_;
}

twin::TwinState SimulatedPlant::state() {
  sync_to_wall();
  return state_;
}

// --- PlantServer -------------------------------------------------------------

PlantServer::PlantServer(twin::TwinParams params, ClockMode mode) : plant_(params, mode) {}

std::string PlantServer::handle_command(std::string_view line) {
  try {
    const auto words = split_ws(line);
    if (words.empty()) return "ERR";
    const std::string_view verb = words.front();

    std::lock_guard lock(mutex_);
    if (iequals(verb, "T1") && words.size() == 1) {
      return format_temperature(plant_.state().t_sensor);
    }
    if (iequals(verb, "VER") && words.size() == 1) return std::string(kVersion);
    if (iequals(verb, "Q1") && words.size() == 2) {
      const auto value = parse_number(words[1]);
      if (!value) return "ERR";
      return fixed2(plant_.set_duty(*value));
    }
    if (iequals(verb, "X_ADV") && words.size() == 2) {
      if (plant_.mode() != ClockMode::Lockstep) return "ERR";
      const auto seconds = parse_number(words[1]);
      if (!seconds || *seconds < 0.0) return "ERR";
      plant_.advance(*seconds);
      return "OK";
    }
    return "ERR";
  } catch (...) {
    return "ERR";
  }
}

twin::TwinState PlantServer::state() {
  std::lock_guard lock(mutex_);
  return plant_.state();
}

double PlantServer::duty() {
  std::lock_guard lock(mutex_);
  return plant_.duty();
}

// --- TcpPlant ----------------------------------------------------------------

class TcpPlant::Connection {
 public:
  Connection(const std::string& host, int port, double timeout_s) : client(host, port, timeout_s) {}
  net::LineClient client;
};

TcpPlant::TcpPlant(const std::string& host, int port, ClockMode mode, double timeout_s)
    : conn_(std::make_unique<Connection>(host, port, timeout_s)),
      mode_(mode),
      wall_start_(std::chrono::steady_clock::now()) {}

TcpPlant::~TcpPlant() = default;

std::string TcpPlant::command(std::string_view line) {
  conn_->client.send_line(line);
  return conn_->client.read_line();
}

PlantSample TcpPlant::read_temperature() {
  const std::string reply = command("T1");
  const auto value = parse_number(reply);
  if (!value) throw PlantIoError(fmt::format("unexpected T1 reply '{}'", reply));
  return {clock(), quantize_temperature(*value), applied_};
}

void TcpPlant::apply_heater(HeaterAction action) {
  if (applied_once_ && action == applied_) return;
  const std::string reply = command(fmt::format("Q1 {}", fixed2(duty_of(action))));
  const auto value = parse_number(reply);
  if (!value || *value != duty_of(action)) {
    throw PlantIoError(fmt::format("unexpected Q1 reply '{}'", reply));
  }
  applied_ = action;
  applied_once_ = true;
}

void TcpPlant::advance(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    throw InvalidInput(fmt::format("cannot advance plant by {} s", seconds));
  }
  if (mode_ == ClockMode::Realtime) {
    wait_seconds(seconds);
    return;
  }
  if (seconds == 0.0) return;
  const std::string reply = command(fmt::format("X_ADV {}", seconds));
  if (reply != "OK") {
    throw PlantIoError(fmt::format("plant refused X_ADV ('{}'); is it serving in lockstep mode?", reply));
  }
  lockstep_clock_ += seconds;
}

double TcpPlant::clock() {
  return mode_ == ClockMode::Lockstep ? lockstep_clock_ : seconds_since(wall_start_);
}

std::pair<std::string, int> parse_endpoint(std::string_view endpoint) {
  const std::size_t colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw ConfigError(fmt::format("endpoint '{}' is not host:port", endpoint));
  }
  int port = -1;
  const std::string_view digits = endpoint.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw ConfigError(fmt::format("endpoint '{}' has an invalid port", endpoint));
  }
  return {std::string(endpoint.substr(0, colon)), port};
}

}  // namespace agentic::plantio
