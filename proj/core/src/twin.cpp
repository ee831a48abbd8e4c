#include "agentic/twin.hpp"

#include <cmath>

#include <fmt/format.h>

#include "agentic/errors.hpp"

namespace agentic::twin {
namespace {

struct Derivative {
  double heater;
  double sensor;
};

Derivative rhs(const TwinParams& p, double t_heater, double t_sensor, double duty) {
  return {
      (p.alpha * duty + p.u_ha * (p.t_amb - t_heater) + p.u_hs * (t_sensor - t_heater)) / p.c_h,
      (p.u_hs * (t_heater - t_sensor) + p.u_sa * (p.t_amb - t_sensor)) / p.c_s,
  };
}

void rk4(const TwinParams& p, double& t_heater, double& t_sensor, double duty, double h) {
  const Derivative k1 = rhs(p, t_heater, t_sensor, duty);
  const Derivative k2 = rhs(p, t_heater + 0.5 * h * k1.heater, t_sensor + 0.5 * h * k1.sensor, duty);
  const Derivative k3 = rhs(p, t_heater + 0.5 * h * k2.heater, t_sensor + 0.5 * h * k2.sensor, duty);
  const Derivative k4 = rhs(p, t_heater + h * k3.heater, t_sensor + h * k3.sensor, duty);
  t_heater += h / 6.0 * (k1.heater + 2.0 * k2.heater + 2.0 * k3.heater + k4.heater);
  t_sensor += h / 6.0 * (k1.sensor + 2.0 * k2.sensor + 2.0 * k3.sensor + k4.sensor);
}

bool finite_params(const TwinParams& p) {
  return std::isfinite(p.t_amb) && std::isfinite(p.alpha) && std::isfinite(p.c_h) &&
         std::isfinite(p.c_s) && std::isfinite(p.u_ha) && std::isfinite(p.u_hs) &&
         std::isfinite(p.u_sa) && std::isfinite(p.dt_internal);
}

void check_duty(double duty) {
  if (!std::isfinite(duty) || duty < 0.0 || duty > 100.0) {
    throw InvalidInput(fmt::format("duty {} outside [0, 100]", duty));
  }
}

void check_integrable(const TwinParams& p, const TwinState& s) {
  if (!finite_params(p)) throw InvalidState("twin parameters are not finite");
  if (p.dt_internal <= 0.0 || p.c_h <= 0.0 || p.c_s <= 0.0) {
    throw InvalidState("twin capacities and dt_internal must be positive");
  }
  if (!std::isfinite(s.t_heater) || !std::isfinite(s.t_sensor) || !std::isfinite(s.clock)) {
    throw InvalidState("twin state is not finite");
  }
}

}  // namespace

void TwinParams::validate(double required_full_duty_sensor) const {
  const auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ConfigError(fmt::format("twin.{} must be finite and > 0 (got {})", name, v));
    }
  };
  if (!std::isfinite(t_amb)) throw ConfigError("twin.t_amb must be finite");
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError(fmt::format("twin.alpha must be finite and >= 0 (got {})", alpha));
  }
  positive(c_h, "c_h");
  positive(c_s, "c_s");
  positive(u_ha, "u_ha");
  positive(u_hs, "u_hs");
  positive(u_sa, "u_sa");
  if (!std::isfinite(dt_internal) || dt_internal <= 0.0 || dt_internal > 1.0) {
    throw ConfigError(fmt::format("twin.dt_internal must lie in (0, 1] (got {})", dt_internal));
  }
  const SteadyState full = steady_state(*this, 100.0);
  if (!(full.t_sensor > required_full_duty_sensor)) {
    throw ConfigError(fmt::format(
        "twin parameters: full-duty sensor steady state {:.3f} does not exceed {} so the heater "
        "can never reach the upper threshold",
        full.t_sensor, required_full_duty_sensor));
  }
}

TwinState ambient_state(const TwinParams& params) { return {params.t_amb, params.t_amb, 0.0}; }

TwinState step(const TwinParams& params, const TwinState& state, double duty, double dt) {
  check_duty(duty);
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw InvalidInput(fmt::format("step length {} must be positive", dt));
  }
  check_integrable(params, state);

  const double h = params.dt_internal;
  const auto full_steps = static_cast<long long>(std::floor(dt / h + 1e-9));
  const double remainder = dt - static_cast<double>(full_steps) * h;

  double t_heater = state.t_heater;
  double t_sensor = state.t_sensor;
  for (long long i = 0; i < full_steps; ++i) rk4(params, t_heater, t_sensor, duty, h);
  if (remainder > 1e-9 * h) rk4(params, t_heater, t_sensor, duty, remainder);

  if (!std::isfinite(t_heater) || !std::isfinite(t_sensor)) {
    throw InvalidState("twin integration diverged");
  }
  return {t_heater, t_sensor, state.clock + dt};
}

SteadyState steady_state(const TwinParams& p, double duty) {
  check_duty(duty);
  if (!finite_params(p)) throw InvalidState("twin parameters are not finite");

  // Heater:  (u_ha + u_hs) T_h -  u_hs T_s          = alpha u + u_ha t_amb
  // Sensor:  -u_hs T_h         + (u_hs + u_sa) T_s  = u_sa t_amb
  const double a11 = p.u_ha + p.u_hs;
  const double a12 = -p.u_hs;
  const double a21 = -p.u_hs;
  const double a22 = p.u_hs + p.u_sa;
  const double b1 = p.alpha * duty + p.u_ha * p.t_amb;
  const double b2 = p.u_sa * p.t_amb;
  const double det = a11 * a22 - a12 * a21;
  if (det == 0.0 || !std::isfinite(det)) {
    throw InvalidState("singular conductance matrix: the plant has no unique steady state");
  }
  return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

Trajectory rollout(const TwinParams& params, const TwinState& state, double duty, double horizon) {
  check_duty(duty);
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw InvalidInput(fmt::format("rollout horizon {} must be positive", horizon));
  }
  check_integrable(params, state);

  Trajectory out;
  out.reserve(static_cast<std::size_t>(std::ceil(horizon)) + 1);
  out.push_back({state.clock, state.t_sensor});

  TwinState current = state;
  double elapsed = 0.0;
  while (horizon - elapsed > 1.0 + 1e-9) {
    current = step(params, current, duty, 1.0);
    elapsed += 1.0;
    out.push_back({current.clock, current.t_sensor});
  }
  const double tail = horizon - elapsed;
  if (tail > 1e-12) {
    current = step(params, current, duty, tail);
    out.push_back({current.clock, current.t_sensor});
  }
  return out;
}

}  // namespace agentic::twin
