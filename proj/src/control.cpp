#include "microfarm/control.hpp"

#include <algorithm>
#include <stdexcept>

namespace microfarm::control {

namespace {

constexpr std::array<Param, 3> kEvalOrder{Param::Temp, Param::Moisture, Param::Light};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const Thresholds& th) {
  require(th.temp_max_c > 0.0 && th.temp_max_c < 50.0, "control.temp_max_c must be in (0, 50)");
  require(th.temp_hyst_c >= 0.0, "control.temp_hyst_c must be >= 0");
  require(th.moisture_min_adc >= 0 && th.moisture_min_adc <= 1023,
          "control.moisture_min_adc must be in [0, 1023]");
  require(th.moisture_hyst_adc >= 0, "control.moisture_hyst_adc must be >= 0");
  require(th.lux_min >= 1 && th.lux_min <= 65535, "control.lux_min must be in [1, 65535]");
  require(th.lux_hyst >= 0, "control.lux_hyst must be >= 0");
}

bool out_of_range(Param channel, double value, const Thresholds& th) {
  switch (channel) {
    case Param::Temp: return value > th.temp_max_c;
    case Param::Moisture: return value < th.moisture_min_adc;
    case Param::Light: return value < th.lux_min;
  }
  return false;
}

namespace {

bool in_off_region(Param channel, double value, const Thresholds& th) {
  switch (channel) {
    case Param::Temp: return value <= th.temp_max_c - th.temp_hyst_c;
    case Param::Moisture: return value >= th.moisture_min_adc + th.moisture_hyst_adc;
    case Param::Light: return value >= th.lux_min + th.lux_hyst;
  }
  return false;
}

}  // namespace

bool desired_on(Param channel, double value, bool currently_on, const Thresholds& th) {
  if (!currently_on) return out_of_range(channel, value, th);
  return !in_off_region(channel, value, th);
}

std::vector<RelayCommand> evaluate(const SensorReading& reading, const Thresholds& th,
                                   const ActuatorFlags& flags, const ControlMode& mode) {
  std::vector<RelayCommand> out;
  if (mode.mode != Mode::Auto) return out;
  for (Param p : kEvalOrder) {
    Actuator a = regulator_for(p);
    bool on = flags.get(a);
    bool want = desired_on(p, reading.value(p), on, th);
    if (want != on) out.push_back(RelayCommand{0, a, want ? Action::On : Action::Off});
  }
  return out;
}

ControlEngine::ControlEngine(Thresholds th, ControlMode initial)
    : th_(th), mode_(std::move(initial)) {
  validate(th_);
}

std::vector<Decision> ControlEngine::decide_locked(const SensorReading& reading, TimeMs ts) {
  std::vector<Decision> out;
  for (const auto& cmd : evaluate(reading, th_, flags_, mode_)) {
    ActuationEvent ev;
    ev.ts_ms = ts;
    ev.actuator = cmd.target;
    ev.action = cmd.action;
    ev.source = EventSource::Auto;
    ev.cause_reading_seq = reading.seq;
    ev.cause_param_value = reading.value(channel_of(cmd.target));
    flags_.set(cmd.target, cmd.action == Action::On);
    out.push_back(Decision{cmd, ev});
  }
  if (!out.empty()) last_decision_ts_ = std::max(last_decision_ts_.value_or(ts), ts);
  return out;
}

std::vector<Decision> ControlEngine::on_reading(const SensorReading& reading) {
  std::lock_guard lk(mu_);
  latest_ = reading;
  if (mode_.mode != Mode::Auto) return {};
  return decide_locked(reading, std::max(reading.timestamp_ms, mode_.changed_at_ms));
}

ModeResult ControlEngine::set_mode(Mode mode, const std::string& by, TimeMs now_ms) {
  std::lock_guard lk(mu_);
  ModeResult result;
  if (mode == mode_.mode) {
    result.mode = mode_;
    return result;
  }
  TimeMs at = now_ms;
  if (last_decision_ts_) at = std::max(at, *last_decision_ts_ + 1);
  at = std::max(at, mode_.changed_at_ms);
  mode_ = ControlMode{mode, at, by};
  result.changed = true;
  result.mode = mode_;
  if (mode == Mode::Auto && latest_) result.decisions = decide_locked(*latest_, at);
  return result;
}

ManualResult ControlEngine::manual_command(Actuator target, Action action, TimeMs now_ms) {
  std::lock_guard lk(mu_);
  if (mode_.mode == Mode::Auto) {
    return Rejected{"manual override is disabled while automatic control is active"};
  }
  bool on = action == Action::On;
  if (flags_.get(target) == on) return Unchanged{};
  flags_.set(target, on);
  ActuationEvent ev;
  ev.ts_ms = std::max(now_ms, mode_.changed_at_ms);
  ev.actuator = target;
  ev.action = action;
  ev.source = EventSource::Manual;
  last_decision_ts_ = std::max(last_decision_ts_.value_or(ev.ts_ms), ev.ts_ms);
  return Decision{RelayCommand{0, target, action}, ev};
}

void ControlEngine::sync_flags(const ActuatorFlags& reported, const ActuatorFlags& mask) {
  std::lock_guard lk(mu_);
  for (Actuator a : kAllActuators) {
    if (mask.get(a)) flags_.set(a, reported.get(a));
  }
}

void ControlEngine::revert(Actuator a, bool on) {
  std::lock_guard lk(mu_);
  flags_.set(a, on);
}

Thresholds ControlEngine::thresholds() const {
  std::lock_guard lk(mu_);
  return th_;
}

ControlMode ControlEngine::mode() const {
  std::lock_guard lk(mu_);
  return mode_;
}

ActuatorFlags ControlEngine::flags() const {
  std::lock_guard lk(mu_);
  return flags_;
}

std::optional<SensorReading> ControlEngine::latest() const {
  std::lock_guard lk(mu_);
  return latest_;
}

}  // namespace microfarm::control
