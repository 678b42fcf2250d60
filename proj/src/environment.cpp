#include "microfarm/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace microfarm::sim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double phase_angle(TimeMs t, TimeMs day_length_ms) {
  TimeMs phase = t % day_length_ms;
  if (phase < 0) phase += day_length_ms;
  return 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(day_length_ms);
}

// Steady periodic response of dT/dt = k (A(t) - T) - pull, evaluated at t.
double particular_temp(TimeMs t, const AmbientProfile& a, double k, double pull) {
  const double omega = 2.0 * std::numbers::pi / (static_cast<double>(a.day_length_ms) / 1000.0);
  const double denom = k * k + omega * omega;
  const double alpha = -k * k * a.temp_amplitude_c / denom;
  const double beta = -k * omega * a.temp_amplitude_c / denom;
  const double theta = phase_angle(t, a.day_length_ms);
  return a.temp_mean_c - pull / k + alpha * std::cos(theta) + beta * std::sin(theta);
}

}  // namespace

void validate(const EnvState& s) {
  require(s.temp_c >= kTempMinC && s.temp_c <= kTempMaxC, "sim temp_c outside [0, 50]");
  require(s.moisture_adc >= 0.0 && s.moisture_adc <= kMoistureMaxAdc,
          "sim moisture_adc outside [0, 1023]");
  require(s.lux >= kLuxMin && s.lux <= kLuxMax, "sim lux outside [1, 65535]");
  require(s.sim_time_ms >= 0, "sim time must be non-negative");
}

void validate(const AmbientProfile& a) {
  require(a.lux_night >= 1, "sim.lux_night must be >= 1");
  require(a.lux_peak <= kLuxMax, "sim.lux_peak must be <= 65535");
  require(a.lux_peak >= a.lux_night, "sim.lux_peak must be >= sim.lux_night");
  require(a.day_length_ms > 0, "sim.day_length_ms must be > 0");
  require(a.moisture_decay_per_s >= 0.0, "sim.moisture_decay_per_s must be >= 0");
  require(std::isfinite(a.temp_mean_c) && std::isfinite(a.temp_amplitude_c),
          "sim ambient temperature must be finite");
}

void validate(const ActuatorEffects& e) {
  require(e.cooler_delta_c_per_s > 0.0, "sim.cooler_delta_c_per_s must be > 0");
  require(e.pump_delta_adc_per_s > 0.0, "sim.pump_delta_adc_per_s must be > 0");
  require(e.ambient_coupling_per_s > 0.0 && e.ambient_coupling_per_s <= 1.0,
          "sim.ambient_coupling_per_s must be in (0, 1]");
  require(e.growlight_lux >= 0 && e.growlight_lux <= kLuxMax,
          "sim.growlight_lux must be in [0, 65535]");
}

int ambient_light(TimeMs sim_time_ms, const AmbientProfile& ambient) {
  const double theta = phase_angle(sim_time_ms, ambient.day_length_ms);
  const double span = static_cast<double>(ambient.lux_peak - ambient.lux_night);
  const double lux = ambient.lux_night + span * 0.5 * (1.0 - std::cos(theta));
  return static_cast<int>(std::clamp<long long>(std::llround(lux), kLuxMin, kLuxMax));
}

double ambient_temp(TimeMs sim_time_ms, const AmbientProfile& ambient) {
  return ambient.temp_mean_c -
         ambient.temp_amplitude_c * std::cos(phase_angle(sim_time_ms, ambient.day_length_ms));
}

EnvState step(const EnvState& state, const ActuatorFlags& actuators,
              const AmbientProfile& ambient, const ActuatorEffects& effects, TimeMs dt_ms) {
  if (dt_ms <= 0) return state;

  const TimeMs t0 = state.sim_time_ms;
  const TimeMs t1 = t0 + dt_ms;
  const double dt_s = static_cast<double>(dt_ms) / 1000.0;

  EnvState next = state;
  next.sim_time_ms = t1;

  const double k = effects.ambient_coupling_per_s;
  const double pull = actuators.cooler ? effects.cooler_delta_c_per_s : 0.0;
  const double p0 = particular_temp(t0, ambient, k, pull);
  const double p1 = particular_temp(t1, ambient, k, pull);
  next.temp_c = std::clamp(p1 + (state.temp_c - p0) * std::exp(-k * dt_s), kTempMinC, kTempMaxC);

  double rate = -ambient.moisture_decay_per_s;
  if (actuators.pump) rate += effects.pump_delta_adc_per_s;
  next.moisture_adc = std::clamp(state.moisture_adc + rate * dt_s, 0.0, kMoistureMaxAdc);

  long long lux = ambient_light(t1, ambient);
  if (actuators.light) lux += effects.growlight_lux;
  next.lux = static_cast<int>(std::clamp<long long>(lux, kLuxMin, kLuxMax));
  return next;
}

Environment::Environment(EnvState initial, AmbientProfile ambient, ActuatorEffects effects)
    : state_(initial), ambient_(ambient), effects_(effects) {
  validate(state_);
  validate(ambient_);
  validate(effects_);
}

void Environment::advance(TimeMs dt_ms) {
  state_ = step(state_, actuators_, ambient_, effects_, dt_ms);
}

}  // namespace microfarm::sim
