#ifndef MICROFARM_STACK_HPP
#define MICROFARM_STACK_HPP

#include <memory>
#include <optional>
#include <thread>

#include "microfarm/clock.hpp"
#include "microfarm/config.hpp"
#include "microfarm/control.hpp"
#include "microfarm/datastore.hpp"
#include "microfarm/environment.hpp"
#include "microfarm/event_bus.hpp"
#include "microfarm/gateway.hpp"
#include "microfarm/http_server.hpp"
#include "microfarm/sensor_node.hpp"

namespace microfarm {

struct StackOptions {
  bool gateway = true;  // datastore, engine, node listener, HTTP API
  bool node = true;     // simulated chamber and sensor node
  // Node-only deployments have no store to resume from.
  std::optional<std::int64_t> first_seq;
};

// The real-time stack on a scaled clock. Listeners bind in the constructor
// (throwing std::runtime_error when an address is taken); start() launches
// the node loop and servers.
class Stack {
 public:
  Stack(const Config& config, StackOptions options);
  ~Stack();
  Stack(const Stack&) = delete;
  Stack& operator=(const Stack&) = delete;

  void start();
  void stop();

  const ScaledClock& clock() const { return *clock_; }
  int node_port() const;
  int api_port() const;
  store::Datastore* store() { return store_.get(); }
  gateway::GatewayCore* core() { return core_.get(); }

 private:
  Config config_;
  StackOptions options_;
  std::unique_ptr<ScaledClock> clock_;
  EventBus bus_;
  std::unique_ptr<store::Datastore> store_;
  std::unique_ptr<control::ControlEngine> engine_;
  std::unique_ptr<gateway::GatewayCore> core_;
  std::unique_ptr<gateway::NodeListener> listener_;
  std::unique_ptr<api::HttpServer> http_;
  std::unique_ptr<sim::Environment> env_;
  std::unique_ptr<node::SensorNode> node_;
  std::jthread node_thread_;
  bool started_ = false;
};

}  // namespace microfarm

#endif  // MICROFARM_STACK_HPP
