#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "agentic/heater.hpp"
#include "agentic/twin.hpp"

namespace agentic::plantio {

// realtime: the clock is wall time and advancing it means waiting.
// lockstep: the clock only moves when the controller advances it.
enum class ClockMode { Realtime, Lockstep };

std::string_view to_string(ClockMode mode) noexcept;
std::optional<ClockMode> clock_mode_from_string(std::string_view text) noexcept;

struct PlantSample {
  double timestamp = 0.0;  // s since run start
  double t_sensor = 0.0;   // °C, quantized to 0.01
  HeaterAction applied = HeaterAction::Off;
};

// Sensor values cross every plant boundary as two-decimal numbers.
double quantize_temperature(double celsius);
std::string format_temperature(double celsius);

// Exclusive handle on a heater/sensor plant. Callers serialize access.
class Plant {
 public:
  virtual ~Plant() = default;

  // Current sensor reading and the action in force. Does not move a
  // lockstep clock.
  virtual PlantSample read_temperature() = 0;

  // Idempotent: re-applying the action in force changes nothing.
  virtual void apply_heater(HeaterAction action) = 0;

  // Lets `seconds` of plant time pass under the applied action. Lockstep
  // plants integrate; realtime plants wait.
  virtual void advance(double seconds) = 0;

  virtual double clock() = 0;
  virtual ClockMode mode() const noexcept = 0;
};

// In-process plant backed by the thermal twin.
class SimulatedPlant final : public Plant {
 public:
  SimulatedPlant(twin::TwinParams params, ClockMode mode);
  SimulatedPlant(twin::TwinParams params, ClockMode mode, twin::TwinState initial);

  PlantSample read_temperature() override;
  void apply_heater(HeaterAction action) override;
  void advance(double seconds) override;
  double clock() override;
  ClockMode mode() const noexcept override { return mode_; }

  // Continuous duty for the line protocol; clamped to [0, 100].
  double set_duty(double duty);
  double duty() const noexcept { return duty_; }

  // Unquantized state, synchronized to wall time first in realtime mode.
  twin::TwinState state();
  const twin::TwinParams& params() const noexcept { return params_; }

 private:
  void sync_to_wall();

  twin::TwinParams params_;
  ClockMode mode_;
  twin::TwinState state_;
  double duty_ = 0.0;
  HeaterAction applied_ = HeaterAction::Off;
  std::chrono::steady_clock::time_point wall_start_;
};

// TCLab-style text protocol served over TCP. One command per line, one
// reply line per command:
//   T1         -> sensor temperature, two decimals
//   Q1 <v>     -> duty := clamp(v, 0, 100); replies the applied duty
//   VER        -> AGENTIC-TWIN 1.0
//   X_ADV <s>  -> lockstep only: advance the clock s seconds; replies OK
// Anything else replies ERR. Verbs are case-insensitive.
class PlantServer {
 public:
  static constexpr std::string_view kVersion = "AGENTIC-TWIN 1.0";

  PlantServer(twin::TwinParams params, ClockMode mode);

  // Never throws; malformed commands yield "ERR". Thread-safe.
  std::string handle_command(std::string_view line);

  twin::TwinState state();
  double duty();

 private:
  std::mutex mutex_;
  SimulatedPlant plant_;
};

// Plant reached through the line protocol.
class TcpPlant final : public Plant {
 public:
  // Throws PlantIoError when the connection cannot be made.
  TcpPlant(const std::string& host, int port, ClockMode mode, double timeout_s = 5.0);
  ~TcpPlant() override;
  TcpPlant(const TcpPlant&) = delete;
  TcpPlant& operator=(const TcpPlant&) = delete;

  PlantSample read_temperature() override;
  void apply_heater(HeaterAction action) override;
  void advance(double seconds) override;
  double clock() override;
  ClockMode mode() const noexcept override { return mode_; }

  // Sends one raw command and returns the reply line without its newline.
  std::string command(std::string_view line);

 private:
  class Connection;
  std::unique_ptr<Connection> conn_;
  ClockMode mode_;
  double lockstep_clock_ = 0.0;
  std::chrono::steady_clock::time_point wall_start_;
  HeaterAction applied_ = HeaterAction::Off;
  bool applied_once_ = false;
};

// Parses "host:port". Throws ConfigError.
std::pair<std::string, int> parse_endpoint(std::string_view endpoint);

}  // namespace agentic::plantio
