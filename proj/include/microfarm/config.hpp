#ifndef MICROFARM_CONFIG_HPP
#define MICROFARM_CONFIG_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "microfarm/control.hpp"
#include "microfarm/datastore.hpp"
#include "microfarm/environment.hpp"
#include "microfarm/sensor_node.hpp"
#include "microfarm/tcp.hpp"

namespace microfarm {

// Everything the stack reads from the flat key=value file.
struct Config {
  sim::EnvState initial{35.0, 250.0, 2000, 0};
  sim::AmbientProfile ambient;
  sim::ActuatorEffects effects;

  control::Thresholds thresholds;
  Mode initial_mode = Mode::Auto;

  store::StoreConfig store;

  Endpoint node_listen{"127.0.0.1", 7300};
  Endpoint api_listen{"127.0.0.1", 8080};
  Endpoint gateway_addr{"127.0.0.1", 7300};
  double time_scale = 1.0;
  std::string ui_dir;

  node::NodeConfig node;
};

// `key` is empty for errors not tied to one key (e.g. a line without '=').
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  std::size_t line() const { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

// Starts from the defaults above and applies each `key = value` line.
// Blank lines and lines starting with '#' are skipped. Unknown keys,
// repeated keys and invalid values throw ConfigError.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

// Cross-field checks; throws ConfigError.
void validate(const Config& c);

std::vector<std::string> config_keys();

}  // namespace microfarm

#endif  // MICROFARM_CONFIG_HPP
