#pragma once

#include <vector>

namespace agentic::twin {

/// Coefficients of the two-node lumped thermal plant: a heater element
/// coupled to a temperature sensor, both losing heat to ambient.
///
///   c_h dT_h/dt = alpha*u + u_ha (t_amb - T_h) + u_hs (T_s - T_h)
///   c_s dT_s/dt = u_hs (T_h - T_s) + u_sa (t_amb - T_s)
///
/// with u the heater duty in percent. The heater node is the one that
/// stores heat, so the sensor keeps rising for a while after the heater
/// switches off.
struct TwinParams {
  double t_amb = 23.0;       // °C
  double alpha = 0.02;       // W per % duty
  double c_h = 5.0;          // J/K
  double c_s = 20.0;         // J/K
  double u_ha = 0.05;        // W/K
  double u_hs = 0.10;        // W/K
  double u_sa = 0.10;        // W/K
  double dt_internal = 0.1;  // s

  /// Checks the full parameter invariants: positive capacities and
  /// conductances, alpha >= 0, dt_internal in (0, 1], and a full-duty sensor
  /// steady state strictly above `required_full_duty_sensor`. Throws
  /// ConfigError naming the offending field.
  void validate(double required_full_duty_sensor = 27.0) const;

  bool operator==(const TwinParams&) const = default;
};

struct TwinState {
  double t_heater = 23.0;  // °C
  double t_sensor = 23.0;  // °C
  double clock = 0.0;      // s

  bool operator==(const TwinState&) const = default;
};

struct SteadyState {
  double t_heater;
  double t_sensor;
};

struct TrajectoryPoint {
  double clock;
  double t_sensor;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// Ambient equilibrium at clock 0.
TwinState ambient_state(const TwinParams& params);

/// Integrates the plant for `dt` seconds at constant `duty` with classical
/// RK4 at fixed substep dt_internal, plus one final partial substep when dt
/// is not a multiple of it. The clock advances by exactly dt.
///
/// Throws InvalidInput for duty outside [0, 100] or non-positive dt, and
/// InvalidState for non-finite state or parameters.
TwinState step(const TwinParams& params, const TwinState& state, double duty, double dt);

/// Fixed point of the plant at constant duty (closed-form 2x2 solve).
/// Throws InvalidState when the conductance matrix is singular.
SteadyState steady_state(const TwinParams& params, double duty);

/// Trajectory sampled at the initial instant, every whole second after it,
/// and the final instant.
Trajectory rollout(const TwinParams& params, const TwinState& state, double duty, double horizon);

}  // namespace agentic::twin
