#ifndef MICROFARM_GATEWAY_HPP
#define MICROFARM_GATEWAY_HPP

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "microfarm/clock.hpp"
#include "microfarm/control.hpp"
#include "microfarm/datastore.hpp"
#include "microfarm/event_bus.hpp"
#include "microfarm/link.hpp"
#include "microfarm/protocol.hpp"
#include "microfarm/tcp.hpp"

namespace microfarm::gateway {

struct GatewayConfig {
  TimeMs cadence_ms = 5000;
  // Node whose readings drive the control engine and which receives manual
  // commands. Other nodes are logged only.
  std::string primary_node = "node-1";
};

enum class Delivery { Pending, Delivered, TimedOut, NotConnected };
std::string_view to_string(Delivery d);

// Outcome of one dispatched relay command.
class CommandTicket {
 public:
  CommandTicket(std::int64_t cmd_id, Delivery initial) : cmd_id_(cmd_id), outcome_(initial) {}

  std::int64_t cmd_id() const { return cmd_id_; }
  Delivery outcome() const;
  // Waits (wall time) until the outcome is no longer Pending.
  Delivery wait_for(std::chrono::milliseconds timeout) const;
  void resolve(Delivery d);

 private:
  std::int64_t cmd_id_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  Delivery outcome_;
};

struct NodeSession {
  std::string session_id;
  std::string node_id;
  TimeMs connected_at_ms = 0;
  std::int64_t last_seq = -1;
  std::set<std::int64_t> pending_acks;
};

// What happened to one inbound line.
enum class LineResult {
  Accepted,       // well-formed and applied
  Duplicate,      // SENSOR with an already-seen seq; dropped silently
  ProtocolError,  // ERR sent, session continues
  Closed,         // session closed (bad or missing HELLO, unknown session)
  Ignored,        // well-formed but nothing to do (stray ACK, ERR from node)
};

struct ApiSnapshot {
  std::optional<SensorReading> reading;
  ActuatorFlags actuators;
  ControlMode mode;
  bool stale = true;
};

enum class ManualStatus { Accepted, Unchanged, Conflict, NotConnected };

struct ManualOutcome {
  ManualStatus status = ManualStatus::Conflict;
  std::shared_ptr<CommandTicket> ticket;
  std::string reason;
};

// Session-terminating, command-dispatching core of the gateway. Transport
// independent: TCP handlers and the in-memory test harness both feed it
// lines. All state sits behind one mutex; the datastore and engine behind
// it are the only shared state between sessions and API clients.
class GatewayCore {
 public:
  using SessionHandle = std::uint64_t;

  GatewayCore(GatewayConfig config, const Clock& clock, store::Datastore& store,
              control::ControlEngine& engine, EventBus& bus);

  // `link` is the write side of the connection; the caller keeps reading.
  SessionHandle open_session(std::shared_ptr<LineLink> link);
  LineResult on_line(SessionHandle session, std::string_view line);
  void close_session(SessionHandle session);
  bool session_open(SessionHandle session) const;

  // Sends CMD to the node's live session. `event` is logged when the node
  // acknowledges.
  std::shared_ptr<CommandTicket> dispatch_command(const std::string& node_id, Actuator target,
                                                  Action action,
                                                  std::optional<ActuationEvent> event = std::nullopt);

  // Expires unacknowledged commands older than three cadence intervals.
  void poll();
  void ping_all();

  ApiSnapshot snapshot() const;
  ActuatorFlags reported_flags() const;
  ControlMode mode() const { return engine_.mode(); }
  control::ModeResult set_mode(Mode mode, const std::string& by);
  ManualOutcome manual_command(Actuator target, Action action);

  bool node_connected(const std::string& node_id) const;
  std::optional<NodeSession> session_for(const std::string& node_id) const;
  std::size_t session_count() const;

  const GatewayConfig& config() const { return config_; }
  const Clock& clock() const { return clock_; }
  store::Datastore& store() { return store_; }
  EventBus& bus() { return bus_; }

 private:
  struct Session {
    std::shared_ptr<LineLink> link;
    bool hello = false;
    NodeSession info;
  };
  struct Pending {
    std::string node_id;
    SessionHandle session = 0;
    Actuator target = Actuator::Pump;
    Action action = Action::Off;
    std::optional<ActuationEvent> event;
    TimeMs deadline_ms = 0;
    std::shared_ptr<CommandTicket> ticket;
  };

  LineResult handle_hello(SessionHandle h, Session& s, const proto::NodeParse& msg);
  LineResult handle_sensor(Session& s, const proto::Sensor& m);
  LineResult handle_ack(Session& s, const proto::Ack& m);
  LineResult handle_state(Session& s, const proto::State& m);

  std::shared_ptr<CommandTicket> dispatch_locked(const std::string& node_id, Actuator target,
                                                 Action action, std::optional<ActuationEvent> event);
  void send_locked(SessionHandle h, Session& s, const std::string& line);
  void close_locked(SessionHandle h);
  void poll_locked(TimeMs now);
  bool has_pending_locked(Actuator a) const;
  void log_event_locked(const ActuationEvent& e);
  Session* live_session_locked(const std::string& node_id);

  GatewayConfig config_;
  const Clock& clock_;
  store::Datastore& store_;
  control::ControlEngine& engine_;
  EventBus& bus_;

  mutable std::mutex mu_;
  std::map<SessionHandle, Session> sessions_;
  std::map<std::string, SessionHandle> by_node_;
  std::map<std::int64_t, Pending> pending_;
  SessionHandle next_handle_ = 1;
  std::int64_t next_cmd_id_ = 1;
  ActuatorFlags reported_;
  std::map<Actuator, Action> last_logged_;
};

// JSON payloads shared by the HTTP API and the event stream.
std::string reading_json(const SensorReading& r);
std::string event_json(const ActuationEvent& e);
std::string mode_json(const ControlMode& m);

// Accepts node connections on a TCP port and feeds them to a GatewayCore,
// one reader thread per connection. Also runs the housekeeping timer
// (command timeouts, keep-alive pings).
class NodeListener {
 public:
  NodeListener(GatewayCore& core, const Endpoint& ep);
  ~NodeListener();

  int port() const { return listener_.port(); }
  void start();
  void stop();

 private:
  void serve(std::shared_ptr<TcpLink> link);

  GatewayCore& core_;
  TcpListener listener_;
  std::atomic<bool> running_{false};
  std::mutex mu_;
  std::vector<std::thread> threads_;
  std::vector<std::weak_ptr<TcpLink>> links_;
  std::thread housekeeper_;
};

}  // namespace microfarm::gateway

#endif  // MICROFARM_GATEWAY_HPP
