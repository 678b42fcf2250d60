#include "microfarm/types.hpp"

#include <cmath>
#include <cstdio>

namespace microfarm {

std::string_view to_string(Actuator a) {
  switch (a) {
    case Actuator::Pump: return "PUMP";
    case Actuator::Cooler: return "COOLER";
    case Actuator::Light: return "LIGHT";
  }
  return "?";
}

std::string_view to_string(Action a) { return a == Action::On ? "ON" : "OFF"; }
std::string_view to_string(Mode m) { return m == Mode::Auto ? "AUTO" : "MANUAL"; }
std::string_view to_string(EventSource s) { return s == EventSource::Auto ? "AUTO" : "MANUAL"; }

std::string_view to_string(Param p) {
  switch (p) {
    case Param::Temp: return "temp";
    case Param::Moisture: return "moisture";
    case Param::Light: return "light";
  }
  return "?";
}

std::optional<Actuator> parse_actuator(std::string_view s) {
  if (s == "PUMP") return Actuator::Pump;
  if (s == "COOLER") return Actuator::Cooler;
  if (s == "LIGHT") return Actuator::Light;
  return std::nullopt;
}

std::optional<Action> parse_action(std::string_view s) {
  if (s == "ON") return Action::On;
  if (s == "OFF") return Action::Off;
  return std::nullopt;
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "AUTO") return Mode::Auto;
  if (s == "MANUAL") return Mode::Manual;
  return std::nullopt;
}

std::optional<EventSource> parse_source(std::string_view s) {
  if (s == "AUTO") return EventSource::Auto;
  if (s == "MANUAL") return EventSource::Manual;
  return std::nullopt;
}

std::optional<Param> parse_param(std::string_view s) {
  if (s == "temp") return Param::Temp;
  if (s == "moisture") return Param::Moisture;
  if (s == "light") return Param::Light;
  return std::nullopt;
}

std::string_view path_name(Actuator a) {
  switch (a) {
    case Actuator::Pump: return "pump";
    case Actuator::Cooler: return "cooler";
    case Actuator::Light: return "light";
  }
  return "?";
}

std::optional<Actuator> parse_path_name(std::string_view s) {
  if (s == "pump") return Actuator::Pump;
  if (s == "cooler") return Actuator::Cooler;
  if (s == "light") return Actuator::Light;
  return std::nullopt;
}

Actuator regulator_for(Param p) {
  switch (p) {
    case Param::Temp: return Actuator::Cooler;
    case Param::Moisture: return Actuator::Pump;
    case Param::Light: return Actuator::Light;
  }
  return Actuator::Pump;
}

Param channel_of(Actuator a) {
  switch (a) {
    case Actuator::Pump: return Param::Moisture;
    case Actuator::Cooler: return Param::Temp;
    case Actuator::Light: return Param::Light;
  }
  return Param::Moisture;
}

bool ActuatorFlags::get(Actuator a) const {
  switch (a) {
    case Actuator::Pump: return pump;
    case Actuator::Cooler: return cooler;
    case Actuator::Light: return light;
  }
  return false;
}

void ActuatorFlags::set(Actuator a, bool on) {
  switch (a) {
    case Actuator::Pump: pump = on; break;
    case Actuator::Cooler: cooler = on; break;
    case Actuator::Light: light = on; break;
  }
}

double SensorReading::value(Param p) const {
  switch (p) {
    case Param::Temp: return temp_c;
    case Param::Moisture: return moisture_adc;
    case Param::Light: return lux;
  }
  return 0.0;
}

double round_to_tenth(double v) { return std::round(v * 10.0) / 10.0; }

std::string format_temp(double temp_c) {
  char buf[32];
  // Round first so that ties resolve identically on every path.
  double r = round_to_tenth(temp_c);
  if (r == 0.0) r = 0.0;  // no "-0.0"
  std::snprintf(buf, sizeof buf, "%.1f", r);
  return buf;
}

}  // namespace microfarm
