#include "microfarm/farm.hpp"

namespace microfarm {

ResumePoint resume_point(const store::Datastore& store, const Config& config) {
  ResumePoint r;
  r.first_seq = store.max_seq(config.node.node_id).value_or(0) + 1;
  r.origin_ms = config.initial.sim_time_ms;
  if (auto t = store.max_timestamp()) r.origin_ms = std::max(r.origin_ms, *t + config.node.cadence_ms);
  auto modes = store.modes();
  if (modes.empty()) {
    r.mode = ControlMode{config.initial_mode, r.origin_ms, "config"};
  } else {
    r.mode = modes.back();
  }
  return r;
}

// Gateway side of the in-memory connection; records both directions.
class SimulatedFarm::GatewayEnd final : public LineLink {
 public:
  GatewayEnd(std::unique_ptr<MemoryLink> inner, const Clock& clock, std::vector<WireLine>& log)
      : inner_(std::move(inner)), clock_(clock), log_(log) {}

  bool send(std::string_view line) override {
    log_.push_back({clock_.now_ms(), false, std::string(line)});
    return inner_->send(line);
  }
  std::optional<std::string> try_receive() override {
    auto l = inner_->try_receive();
    if (l) log_.push_back({clock_.now_ms(), true, *l});
    return l;
  }
  std::optional<std::string> receive_for(std::chrono::milliseconds) override { return try_receive(); }
  bool is_open() const override { return inner_->is_open(); }
  void close() override { inner_->close(); }

 private:
  std::unique_ptr<MemoryLink> inner_;
  const Clock& clock_;
  std::vector<WireLine>& log_;
};

SimulatedFarm::SimulatedFarm(const Config& config) : config_(config) {
  store_ = std::make_unique<store::Datastore>(config_.store);
  const ResumePoint rp = resume_point(*store_, config_);
  clock_.set(rp.origin_ms);
  engine_ = std::make_unique<control::ControlEngine>(config_.thresholds, rp.mode);
  core_ = std::make_unique<gateway::GatewayCore>(
      gateway::GatewayConfig{config_.node.cadence_ms, config_.node.node_id}, clock_, *store_, *engine_, bus_);

  sim::EnvState initial = config_.initial;
  initial.sim_time_ms = rp.origin_ms;
  env_ = std::make_unique<sim::Environment>(initial, config_.ambient, config_.effects);

  node::NodeConfig nc = config_.node;
  nc.first_seq = rp.first_seq;
  node_ = std::make_unique<node::SensorNode>(nc, *env_, [this]() -> std::unique_ptr<LineLink> {
    if (!reachable_) return nullptr;
    if (session_ != 0) core_->close_session(session_);
    auto [node_end, gw_end] = make_memory_link();
    link_ = std::make_shared<GatewayEnd>(std::move(gw_end), clock_, wire_);
    session_ = core_->open_session(link_);
    return node_end;
  });
}

SimulatedFarm::~SimulatedFarm() {
  if (link_) link_->close();
}

void SimulatedFarm::pump_gateway() {
  if (!link_) return;
  while (auto line = link_->try_receive()) {
    if (core_->on_line(session_, *line) == gateway::LineResult::Closed) break;
  }
  if (!link_->is_open() && session_ != 0) {
    core_->close_session(session_);
    session_ = 0;
  }
}

void SimulatedFarm::tick() {
  clock_.set(env_->state().sim_time_ms);
  node_->tick();
  pump_gateway();
  core_->poll();
}

void SimulatedFarm::run_for(TimeMs duration_ms) {
  const TimeMs end = env_->state().sim_time_ms + duration_ms;
  while (env_->state().sim_time_ms < end) tick();
}

void SimulatedFarm::drop_link() {
  if (link_) link_->close();
  if (session_ != 0) {
    core_->close_session(session_);
    session_ = 0;
  }
}

}  // namespace microfarm
