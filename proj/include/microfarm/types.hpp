#ifndef MICROFARM_TYPES_HPP
#define MICROFARM_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace microfarm {

// Virtual milliseconds since scenario start.
using TimeMs = std::int64_t;

enum class Actuator { Pump, Cooler, Light };
enum class Action { On, Off };
enum class Mode { Auto, Manual };
enum class EventSource { Auto, Manual };

// Sensed channel each actuator regulates.
enum class Param { Temp, Moisture, Light };

inline constexpr std::array<Actuator, 3> kAllActuators{Actuator::Pump, Actuator::Cooler,
                                                       Actuator::Light};
inline constexpr std::array<Param, 3> kAllParams{Param::Temp, Param::Moisture, Param::Light};

std::string_view to_string(Actuator a);
std::string_view to_string(Action a);
std::string_view to_string(Mode m);
std::string_view to_string(EventSource s);
std::string_view to_string(Param p);

// Wire/API spellings: "PUMP", "ON", "AUTO", "temp" ...; case-sensitive.
std::optional<Actuator> parse_actuator(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Mode> parse_mode(std::string_view s);
std::optional<EventSource> parse_source(std::string_view s);
std::optional<Param> parse_param(std::string_view s);

// Lower-case actuator names used in API paths ("pump", "cooler", "light").
std::string_view path_name(Actuator a);
std::optional<Actuator> parse_path_name(std::string_view s);

Actuator regulator_for(Param p);
Param channel_of(Actuator a);

struct ActuatorFlags {
  bool pump = false;
  bool cooler = false;
  bool light = false;

  bool get(Actuator a) const;
  void set(Actuator a, bool on);

  friend bool operator==(const ActuatorFlags&, const ActuatorFlags&) = default;
};

struct RelayCommand {
  std::int64_t cmd_id = 0;
  Actuator target = Actuator::Pump;
  Action action = Action::Off;

  friend bool operator==(const RelayCommand&, const RelayCommand&) = default;
};

struct SensorReading {
  std::string node_id;
  std::int64_t seq = 0;
  TimeMs timestamp_ms = 0;
  double temp_c = 0.0;  // 0.1 resolution on the wire
  int moisture_adc = 0;
  int lux = 1;

  double value(Param p) const;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

struct ActuationEvent {
  TimeMs ts_ms = 0;
  Actuator actuator = Actuator::Pump;
  Action action = Action::Off;
  EventSource source = EventSource::Auto;
  std::optional<std::int64_t> cause_reading_seq;
  std::optional<double> cause_param_value;

  friend bool operator==(const ActuationEvent&, const ActuationEvent&) = default;
};

struct ControlMode {
  Mode mode = Mode::Auto;
  TimeMs changed_at_ms = 0;
  std::string changed_by = "system";

  friend bool operator==(const ControlMode&, const ControlMode&) = default;
};

// Sensor values captured at a moment (visit records, API snapshots).
struct SnapshotValues {
  double temp_c = 0.0;
  int moisture_adc = 0;
  int lux = 1;

  friend bool operator==(const SnapshotValues&, const SnapshotValues&) = default;
};

// One-decimal text rendering of a temperature, shared by the wire protocol and CSV files.
std::string format_temp(double temp_c);
double round_to_tenth(double v);

}  // namespace microfarm

#endif  // MICROFARM_TYPES_HPP
