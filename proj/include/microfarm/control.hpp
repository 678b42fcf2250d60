#ifndef MICROFARM_CONTROL_HPP
#define MICROFARM_CONTROL_HPP

#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "microfarm/types.hpp"

namespace microfarm::control {

// Setpoints. Each regulator is one-sided: the cooler only cools, the pump
// only wets, the light only brightens. A band of 0 gives a bare threshold.
struct Thresholds {
  double temp_max_c = 30.0;
  double temp_hyst_c = 1.0;
  int moisture_min_adc = 300;
  int moisture_hyst_adc = 30;
  int lux_min = 5000;
  int lux_hyst = 250;
};

// Throws std::invalid_argument naming the offending key.
void validate(const Thresholds& th);

// Hysteresis relation for one channel: whether the regulator should be on
// after observing `value`, given whether it is on now.
//   cooler: on above temp_max_c, off at or below temp_max_c - temp_hyst_c
//   pump:   on below moisture_min_adc, off at or above min + hyst
//   light:  on below lux_min, off at or above lux_min + lux_hyst
// Between the two points the current state is kept.
bool desired_on(Param channel, double value, bool currently_on, const Thresholds& th);

// Strictly outside the acceptable range (the turn-on region).
bool out_of_range(Param channel, double value, const Thresholds& th);

// Commands needed to move `flags` to the desired state for this reading.
// Empty in MANUAL mode. cmd_id is left at 0 for the dispatcher to assign.
// Order: cooler, pump, light.
std::vector<RelayCommand> evaluate(const SensorReading& reading, const Thresholds& th,
                                   const ActuatorFlags& flags, const ControlMode& mode);

// A command the engine wants sent, with the event to log once it takes effect.
struct Decision {
  RelayCommand command;
  ActuationEvent event;
};

struct Rejected {
  std::string reason;
};
struct Unchanged {};

using ManualResult = std::variant<Decision, Rejected, Unchanged>;

struct ModeResult {
  bool changed = false;
  ControlMode mode;
  std::vector<Decision> decisions;  // immediate AUTO correction on entering AUTO
};

// The automation engine. Every public operation runs under one mutex.
//
// flags() is the engine's belief about the regulators: updated the moment a
// decision is issued and re-synchronized from node STATE reports.
//
// Decision timestamps never precede the current mode's changed_at, and a
// mode change is stamped strictly after the last decision, so every event
// falls inside the mode interval that produced it.
class ControlEngine {
 public:
  explicit ControlEngine(Thresholds th = {}, ControlMode initial = {});

  std::vector<Decision> on_reading(const SensorReading& reading);
  ModeResult set_mode(Mode mode, const std::string& by, TimeMs now_ms);
  ManualResult manual_command(Actuator target, Action action, TimeMs now_ms);

  // Overwrites belief for the channels in `mask` with the reported state.
  void sync_flags(const ActuatorFlags& reported, const ActuatorFlags& mask);
  // Forces belief for one channel (a command failed to go out).
  void revert(Actuator a, bool on);

  Thresholds thresholds() const;
  ControlMode mode() const;
  ActuatorFlags flags() const;
  std::optional<SensorReading> latest() const;

 private:
  std::vector<Decision> decide_locked(const SensorReading& reading, TimeMs ts);

  mutable std::mutex mu_;
  Thresholds th_;
  ControlMode mode_;
  ActuatorFlags flags_;
  std::optional<SensorReading> latest_;
  std::optional<TimeMs> last_decision_ts_;
};

}  // namespace microfarm::control

#endif  // MICROFARM_CONTROL_HPP
