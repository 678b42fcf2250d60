#ifndef MICROFARM_SENSOR_NODE_HPP
#define MICROFARM_SENSOR_NODE_HPP

#include <functional>
#include <memory>
#include <stop_token>
#include <string>
#include <vector>

#include "microfarm/clock.hpp"
#include "microfarm/environment.hpp"
#include "microfarm/link.hpp"
#include "microfarm/protocol.hpp"

namespace microfarm::node {

struct NodeConfig {
  std::string node_id = "node-1";
  TimeMs cadence_ms = 5000;
  std::int64_t first_seq = 1;
};

inline constexpr TimeMs kBackoffInitialMs = 1000;
inline constexpr TimeMs kBackoffCapMs = 30000;

// Relay semantics: only the target bit changes; re-applying is a no-op.
ActuatorFlags apply_command(const RelayCommand& cmd, ActuatorFlags flags);

// Sensor front end: DHT11-style temperature at 0.1 degC, 10-bit moisture ADC,
// integer lux.
SensorReading sample(const sim::EnvState& state, const std::string& node_id, std::int64_t seq);

// Opens the node's single outbound link. Returns nullptr when the gateway is
// unreachable.
using Connector = std::function<std::unique_ptr<LineLink>()>;

struct NodeCounters {
  std::int64_t frames_sent = 0;
  std::int64_t readings_dropped = 0;
  std::int64_t connects = 0;
  std::int64_t connect_failures = 0;
};

// The sensor node. It only ever dials out through the connector and never
// listens. All work happens on the thread that calls tick()/run_loop().
class SensorNode {
 public:
  SensorNode(NodeConfig config, sim::Environment& env, Connector connector);

  // One cadence tick at the environment's current virtual time:
  // reconnect if due, drain inbound lines, apply pending commands (ACK each,
  // STATE on change), sample and send one SENSOR frame, then advance the
  // environment by one cadence.
  void tick();

  // Drains inbound lines without sampling. Commands are queued until the
  // next tick.
  void service_link();

  // Real-time driver: ticks whenever the scaled clock reaches the
  // environment's time, servicing the link in between. Returns when stop is
  // requested.
  void run_loop(const ScaledClock& clock, std::stop_token stop);

  const ActuatorFlags& flags() const { return env_.actuators(); }
  std::int64_t next_seq() const { return next_seq_; }
  bool connected() const { return link_ && link_->is_open(); }
  const std::string& session_id() const { return session_id_; }
  const NodeCounters& counters() const { return counters_; }
  TimeMs next_connect_attempt_ms() const { return next_attempt_ms_; }
  TimeMs current_backoff_ms() const { return backoff_ms_; }

 private:
  TimeMs now() const { return env_.state().sim_time_ms; }
  void maybe_connect();
  void on_disconnect();
  void send(const std::string& line);
  void handle_inbound(std::string_view line);
  void apply_pending();

  NodeConfig config_;
  sim::Environment& env_;
  Connector connector_;
  std::unique_ptr<LineLink> link_;
  std::string session_id_;
  std::vector<RelayCommand> pending_;
  std::int64_t next_seq_;
  TimeMs next_attempt_ms_ = 0;
  TimeMs backoff_ms_ = kBackoffInitialMs;
  NodeCounters counters_;
};

}  // namespace microfarm::node

#endif  // MICROFARM_SENSOR_NODE_HPP
