#include "microfarm/report.hpp"

#include <fstream>

#include "microfarm/datastore.hpp"

namespace microfarm::report {

std::vector<ActuationEvent> replay_events(const std::vector<SensorReading>& readings,
                                          const control::Thresholds& th,
                                          const std::optional<std::string>& node_id) {
  std::vector<ActuationEvent> out;
  if (readings.empty()) return out;
  control::ControlEngine engine(th, ControlMode{Mode::Auto, readings.front().timestamp_ms, "replay"});
  // Same collapsing as the gateway's event log: alternate per actuator and
  // start with an ON.
  std::map<Actuator, Action> last;
  for (const auto& r : readings) {
    if (node_id && r.node_id != *node_id) continue;
    for (const auto& d : engine.on_reading(r)) {
      auto it = last.find(d.event.actuator);
      if (it == last.end() ? d.event.action == Action::Off : it->second == d.event.action) continue;
      last[d.event.actuator] = d.event.action;
      out.push_back(d.event);
    }
  }
  return out;
}

std::string events_csv(const std::vector<ActuationEvent>& events) {
  std::string s = std::string(store::kEventsHeader) + "\n";
  for (const auto& e : events) s += store::format_event_row(e) + "\n";
  return s;
}

namespace {

std::string format_value(Param p, double v) {
  if (p == Param::Temp) return format_temp(v);
  return std::to_string(static_cast<long long>(v));
}

}  // namespace

Files build_report(const std::vector<SensorReading>& readings, const std::vector<ActuationEvent>& events,
                   int day) {
  if (day < 1) throw std::invalid_argument("day must be >= 1");
  const TimeMs begin = (day - 1) * kDayMs;
  const TimeMs end = day * kDayMs;
  Files files;
  for (Param p : kAllParams) {
    const Actuator reg = regulator_for(p);
    std::vector<ActuationEvent> ev;
    for (const auto& e : events) {
      if (e.actuator == reg) ev.push_back(e);
    }
    std::stable_sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.ts_ms < b.ts_ms; });

    std::string values = "ts_ms,value\n";
    std::string regulator = "ts_ms,on\n";
    bool on = false;
    std::size_t next = 0;
    for (const auto& r : readings) {
      if (r.timestamp_ms < begin || r.timestamp_ms >= end) continue;
      while (next < ev.size() && ev[next].ts_ms <= r.timestamp_ms) on = ev[next++].action == Action::On;
      values += std::to_string(r.timestamp_ms) + "," + format_value(p, r.value(p)) + "\n";
      regulator += std::to_string(r.timestamp_ms) + (on ? ",1\n" : ",0\n");
    }
    const std::string name(to_string(p));
    files[name + "_values.csv"] = std::move(values);
    files[name + "_regulator.csv"] = std::move(regulator);
  }
  return files;
}

Files report_from_dir(const std::filesystem::path& data_dir, int day) {
  const auto readings_path = data_dir / "readings.csv";
  const auto events_path = data_dir / "events.csv";
  for (const auto& p : {readings_path, events_path}) {
    if (!std::filesystem::is_regular_file(p)) throw ReportError("missing " + p.string());
  }
  return build_report(store::read_readings_csv(readings_path), store::read_events_csv(events_path), day);
}

void write_files(const Files& files, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, content] : files) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
  }
}

}  // namespace microfarm::report
