#include "oracles.hpp"

#include <cmath>

namespace oracle {

State euler(const Params& p, State s, double duty, double seconds, double h) {
  double done = 0.0;
  while (done < seconds - 1e-12) {
    const double dt = std::min(h, seconds - done);
    const double dh = (p.alpha * duty + p.u_ha * (p.t_amb - s.heater) + p.u_hs * (s.sensor - s.heater)) / p.c_h;
    const double ds = (p.u_hs * (s.heater - s.sensor) + p.u_sa * (p.t_amb - s.sensor)) / p.c_s;
    s.heater += dt * dh;
    s.sensor += dt * ds;
    done += dt;
  }
  return s;
}

State equilibrium(const Params& p, double duty) {
  // Sensor balance gives T_s - amb = u_hs (T_h - amb) / (u_hs + u_sa).
  // Substituting into the heater balance isolates T_h - amb.
  const double k = p.u_hs / (p.u_hs + p.u_sa);
  const double rise_h = p.alpha * duty / (p.u_ha + p.u_hs - p.u_hs * k);
  return {p.t_amb + rise_h, p.t_amb + k * rise_h};
}

double sensor_slope(const Params& p, const State& s) {
  return (p.u_hs * (s.heater - s.sensor) + p.u_sa * (p.t_amb - s.sensor)) / p.c_s;
}

bool rule_on(double t, bool prev_on, double low, double high) {
  if (t > high) return false;
  if (t < low) return true;
  return prev_on;
}

double round2(double v) {
  const double r = std::round(std::fabs(v) * 100.0) / 100.0;
  return v < 0 ? -r : r;
}

std::vector<LoopSample> closed_loop(const Params& p, double latency, double duration, double low,
                                    double high, double h) {
  std::vector<LoopSample> out;
  State s{p.t_amb, p.t_amb};
  bool on = false;
  double t = 0.0;
  while (t < duration) {
    const double reading = round2(s.sensor);
    const double start = t;
    s = euler(p, s, on ? 100.0 : 0.0, latency, h);
    t += latency;
    on = rule_on(reading, on, low, high);
    out.push_back({start, reading, on});
  }
  return out;
}

ZohMetrics zoh(const std::vector<LoopSample>& samples, double duration, double low, double high) {
  ZohMetrics m;
  const double mid = 0.5 * (low + high);
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double start = std::min(samples[i].t, duration);
    const double end = i + 1 < samples.size() ? std::min(samples[i + 1].t, duration) : duration;
    const double dt = std::max(0.0, end - start);
    if (samples[i].sensor > high) m.above += dt;
    if (samples[i].sensor < low) m.below += dt;
    weighted += std::fabs(samples[i].sensor - mid) * dt;
    total += dt;
  }
  m.avg_dev = total > 0 ? weighted / total : 0.0;
  return m;
}

}  // namespace oracle
