#ifndef MICROFARM_FARM_HPP
#define MICROFARM_FARM_HPP

#include <memory>
#include <string>
#include <vector>

#include "microfarm/clock.hpp"
#include "microfarm/config.hpp"
#include "microfarm/control.hpp"
#include "microfarm/datastore.hpp"
#include "microfarm/environment.hpp"
#include "microfarm/event_bus.hpp"
#include "microfarm/gateway.hpp"
#include "microfarm/sensor_node.hpp"

namespace microfarm {

// Where a (re)started stack picks up from what is already on disk.
struct ResumePoint {
  std::int64_t first_seq = 1;
  TimeMs origin_ms = 0;
  ControlMode mode;
};

// Sequence numbers continue after the newest stored reading for the node,
// virtual time one cadence after the newest stored record, and the mode is
// the last logged one (the config's initial mode for an empty store).
ResumePoint resume_point(const store::Datastore& store, const Config& config);

struct WireLine {
  TimeMs ts_ms = 0;
  bool to_gateway = true;
  std::string line;
};

// The whole stack in one thread on a manual clock, wired with in-memory
// links: chamber, node, gateway core, engine and datastore. Every tick is
// one node cadence. Deterministic for a given config and store directory.
class SimulatedFarm {
 public:
  explicit SimulatedFarm(const Config& config);
  ~SimulatedFarm();

  // One node tick followed by gateway processing of everything the node sent.
  void tick();
  // Ticks until virtual time has advanced by at least `duration_ms`.
  void run_for(TimeMs duration_ms);

  // Closes the current connection from the gateway side.
  void drop_link();
  // When false, connection attempts fail until set back to true.
  void set_gateway_reachable(bool reachable) { reachable_ = reachable; }

  ManualClock& clock() { return clock_; }
  store::Datastore& store() { return *store_; }
  control::ControlEngine& engine() { return *engine_; }
  gateway::GatewayCore& core() { return *core_; }
  EventBus& bus() { return bus_; }
  sim::Environment& env() { return *env_; }
  node::SensorNode& node() { return *node_; }
  const Config& config() const { return config_; }
  const std::vector<WireLine>& wire_log() const { return wire_; }

 private:
  class GatewayEnd;
  void pump_gateway();

  Config config_;
  ManualClock clock_;
  EventBus bus_;
  std::unique_ptr<store::Datastore> store_;
  std::unique_ptr<control::ControlEngine> engine_;
  std::unique_ptr<gateway::GatewayCore> core_;
  std::unique_ptr<sim::Environment> env_;
  std::unique_ptr<node::SensorNode> node_;

  std::shared_ptr<GatewayEnd> link_;
  gateway::GatewayCore::SessionHandle session_ = 0;
  bool reachable_ = true;
  std::vector<WireLine> wire_;
};

}  // namespace microfarm

#endif  // MICROFARM_FARM_HPP
