#include "microfarm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "microfarm/protocol.hpp"

namespace microfarm {

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T number(std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw std::invalid_argument("not a number: '" + std::string(v) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw std::invalid_argument("not finite");
  }
  return out;
}

int int_value(std::string_view v) { return number<int>(v); }

using Setter = std::function<void(Config&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"sim.initial_temp_c", [](Config& c, auto v) { c.initial.temp_c = number<double>(v); }},
      {"sim.initial_moisture_adc", [](Config& c, auto v) { c.initial.moisture_adc = number<double>(v); }},
      {"sim.initial_lux", [](Config& c, auto v) { c.initial.lux = int_value(v); }},
      {"sim.start_time_ms", [](Config& c, auto v) { c.initial.sim_time_ms = number<TimeMs>(v); }},
      {"sim.temp_mean_c", [](Config& c, auto v) { c.ambient.temp_mean_c = number<double>(v); }},
      {"sim.temp_amplitude_c", [](Config& c, auto v) { c.ambient.temp_amplitude_c = number<double>(v); }},
      {"sim.lux_peak", [](Config& c, auto v) { c.ambient.lux_peak = int_value(v); }},
      {"sim.lux_night", [](Config& c, auto v) { c.ambient.lux_night = int_value(v); }},
      {"sim.day_length_ms", [](Config& c, auto v) { c.ambient.day_length_ms = number<TimeMs>(v); }},
      {"sim.moisture_decay_per_s", [](Config& c, auto v) { c.ambient.moisture_decay_per_s = number<double>(v); }},
      {"sim.cooler_delta_c_per_s", [](Config& c, auto v) { c.effects.cooler_delta_c_per_s = number<double>(v); }},
      {"sim.pump_delta_adc_per_s", [](Config& c, auto v) { c.effects.pump_delta_adc_per_s = number<double>(v); }},
      {"sim.growlight_lux", [](Config& c, auto v) { c.effects.growlight_lux = int_value(v); }},
      {"sim.ambient_coupling_per_s", [](Config& c, auto v) { c.effects.ambient_coupling_per_s = number<double>(v); }},

      {"control.temp_max_c", [](Config& c, auto v) { c.thresholds.temp_max_c = number<double>(v); }},
      {"control.temp_hyst_c", [](Config& c, auto v) { c.thresholds.temp_hyst_c = number<double>(v); }},
      {"control.moisture_min_adc", [](Config& c, auto v) { c.thresholds.moisture_min_adc = int_value(v); }},
      {"control.moisture_hyst_adc", [](Config& c, auto v) { c.thresholds.moisture_hyst_adc = int_value(v); }},
      {"control.lux_min", [](Config& c, auto v) { c.thresholds.lux_min = int_value(v); }},
      {"control.lux_hyst", [](Config& c, auto v) { c.thresholds.lux_hyst = int_value(v); }},
      {"control.initial_mode",
       [](Config& c, auto v) {
         auto m = parse_mode(v);
         if (!m) throw std::invalid_argument("expected AUTO or MANUAL");
         c.initial_mode = *m;
       }},

      {"store.dir", [](Config& c, auto v) { c.store.dir = std::string(v); }},
      {"store.mem_window_h", [](Config& c, auto v) { c.store.mem_window_h = int_value(v); }},

      {"net.node_listen", [](Config& c, auto v) { c.node_listen = parse_endpoint(std::string(v)); }},
      {"net.api_listen", [](Config& c, auto v) { c.api_listen = parse_endpoint(std::string(v)); }},
      {"net.gateway_addr", [](Config& c, auto v) { c.gateway_addr = parse_endpoint(std::string(v)); }},
      {"net.time_scale", [](Config& c, auto v) { c.time_scale = number<double>(v); }},
      {"net.ui_dir", [](Config& c, auto v) { c.ui_dir = std::string(v); }},

      {"node.cadence_ms", [](Config& c, auto v) { c.node.cadence_ms = number<TimeMs>(v); }},
      {"node.id", [](Config& c, auto v) { c.node.node_id = std::string(v); }},
  };
  return table;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

void validate(const Config& c) {
  auto wrap = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, 0, std::string(key) + ": " + e.what());
    }
  };
  wrap("sim", [&] {
    sim::validate(c.initial);
    sim::validate(c.ambient);
    sim::validate(c.effects);
  });
  wrap("control", [&] { control::validate(c.thresholds); });
  if (c.store.dir.empty()) throw ConfigError("store.dir", 0, "store.dir: must not be empty");
  if (c.store.mem_window_h < 4) {
    throw ConfigError("store.mem_window_h", 0, "store.mem_window_h: must be at least 4 (the history window)");
  }
  if (!(c.time_scale > 0.0)) throw ConfigError("net.time_scale", 0, "net.time_scale: must be positive");
  if (c.node.cadence_ms <= 0) throw ConfigError("node.cadence_ms", 0, "node.cadence_ms: must be positive");
  if (!proto::valid_identifier(c.node.node_id)) {
    throw ConfigError("node.id", 0, "node.id: must be 1-64 characters of [A-Za-z0-9._:-]");
  }
}

Config parse_config(std::string_view text) {
  Config c;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", line_no, "line " + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError(std::string(key), line_no,
                        "line " + std::to_string(line_no) + ": unknown config key '" + std::string(key) + "'");
    }
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(std::string(key), line_no,
                        "line " + std::to_string(line_no) + ": duplicate config key '" + std::string(key) + "'");
    }
    try {
      it->second(c, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(key), line_no,
                        "line " + std::to_string(line_no) + ": bad value for '" + std::string(key) + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace microfarm
