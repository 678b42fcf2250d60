#include "microfarm/stack.hpp"

#include "microfarm/farm.hpp"

namespace microfarm {

Stack::Stack(const Config& config, StackOptions options) : config_(config), options_(options) {
  TimeMs origin = config_.initial.sim_time_ms;
  std::int64_t first_seq = options_.first_seq.value_or(1);

  if (options_.gateway) {
    store_ = std::make_unique<store::Datastore>(config_.store);
    const ResumePoint rp = resume_point(*store_, config_);
    origin = rp.origin_ms;
    if (!options_.first_seq) first_seq = rp.first_seq;
    clock_ = std::make_unique<ScaledClock>(config_.time_scale, origin);
    engine_ = std::make_unique<control::ControlEngine>(config_.thresholds, rp.mode);
    core_ = std::make_unique<gateway::GatewayCore>(
        gateway::GatewayConfig{config_.node.cadence_ms, config_.node.node_id}, *clock_, *store_, *engine_, bus_);
    listener_ = std::make_unique<gateway::NodeListener>(*core_, config_.node_listen);
    http_ = std::make_unique<api::HttpServer>(*core_, config_.api_listen, config_.ui_dir);
  } else {
    clock_ = std::make_unique<ScaledClock>(config_.time_scale, origin);
  }

  if (options_.node) {
    sim::EnvState initial = config_.initial;
    initial.sim_time_ms = origin;
    env_ = std::make_unique<sim::Environment>(initial, config_.ambient, config_.effects);
    Endpoint target = config_.gateway_addr;
    if (options_.gateway) target = Endpoint{"127.0.0.1", listener_->port()};
    node::NodeConfig nc = config_.node;
    nc.first_seq = first_seq;
    node_ = std::make_unique<node::SensorNode>(nc, *env_, [target]() -> std::unique_ptr<LineLink> {
      return connect_tcp(target, std::chrono::milliseconds(500));
    });
  }
}

Stack::~Stack() { stop(); }

int Stack::node_port() const { return listener_ ? listener_->port() : 0; }
int Stack::api_port() const { return http_ ? http_->port() : 0; }

void Stack::start() {
  if (started_) return;
  started_ = true;
  if (listener_) listener_->start();
  if (http_) http_->start();
  if (node_) {
    node_thread_ = std::jthread([this](std::stop_token st) { node_->run_loop(*clock_, st); });
  }
}

void Stack::stop() {
  if (!started_) return;
  started_ = false;
  if (node_thread_.joinable()) {
    node_thread_.request_stop();
    node_thread_.join();
  }
  bus_.shutdown();
  if (http_) http_->stop();
  if (listener_) listener_->stop();
}

}  // namespace microfarm
