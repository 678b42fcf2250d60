#ifndef MICROFARM_ENVIRONMENT_HPP
#define MICROFARM_ENVIRONMENT_HPP

#include "microfarm/types.hpp"

namespace microfarm::sim {

inline constexpr double kTempMinC = 0.0;
inline constexpr double kTempMaxC = 50.0;
inline constexpr double kMoistureMaxAdc = 1023.0;
inline constexpr int kLuxMin = 1;
inline constexpr int kLuxMax = 65535;

// Chamber state. Moisture is carried as a continuous level and quantized to
// ADC counts only when a sensor reads it; otherwise slow decay rates would
// round away to nothing on every step.
struct EnvState {
  double temp_c = 28.0;
  double moisture_adc = 500.0;
  int lux = 1;
  TimeMs sim_time_ms = 0;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct AmbientProfile {
  double temp_mean_c = 33.0;
  double temp_amplitude_c = 2.0;
  int lux_peak = 4500;
  int lux_night = 5;
  TimeMs day_length_ms = 86'400'000;
  double moisture_decay_per_s = 0.05;
};

struct ActuatorEffects {
  double cooler_delta_c_per_s = 0.02;
  double pump_delta_adc_per_s = 2.0;
  int growlight_lux = 6000;
  double ambient_coupling_per_s = 0.001;
};

// Throw std::invalid_argument naming the offending field.
void validate(const EnvState& s);
void validate(const AmbientProfile& a);
void validate(const ActuatorEffects& e);

// Raised-cosine day: lux_night at midnight (phase 0), lux_peak at noon.
int ambient_light(TimeMs sim_time_ms, const AmbientProfile& ambient);

// Ambient air temperature; coldest at midnight, warmest at noon.
double ambient_temp(TimeMs sim_time_ms, const AmbientProfile& ambient);

// Advances the chamber by dt_ms.
//
// Temperature follows dT/dt = k (T_amb(t) - T) - c [cooler on], integrated in
// closed form over the step (T_amb is sinusoidal, so the exact solution is a
// decaying transient plus a phase-shifted sinusoid). Because the update is the
// exact flow of the ODE, two steps of dt compose to one step of 2 dt up to
// rounding. Moisture changes at the constant rate pump - decay. Lux is
// memoryless. Results are clamped to the sensor envelopes.
EnvState step(const EnvState& state, const ActuatorFlags& actuators,
              const AmbientProfile& ambient, const ActuatorEffects& effects, TimeMs dt_ms);

// Stateful chamber: owns the state, the current regulator outputs, and the
// profiles. Single owner; state() returns a value snapshot.
class Environment {
 public:
  Environment(EnvState initial, AmbientProfile ambient, ActuatorEffects effects);

  void advance(TimeMs dt_ms);
  void set_actuators(const ActuatorFlags& flags) { actuators_ = flags; }

  const EnvState& state() const { return state_; }
  const ActuatorFlags& actuators() const { return actuators_; }
  const AmbientProfile& ambient() const { return ambient_; }
  const ActuatorEffects& effects() const { return effects_; }

 private:
  EnvState state_;
  AmbientProfile ambient_;
  ActuatorEffects effects_;
  ActuatorFlags actuators_;
};

}  // namespace microfarm::sim

#endif  // MICROFARM_ENVIRONMENT_HPP
