#include "microfarm/sensor_node.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <type_traits>

namespace microfarm::node {

ActuatorFlags apply_command(const RelayCommand& cmd, ActuatorFlags flags) {
  flags.set(cmd.target, cmd.action == Action::On);
  return flags;
}

SensorReading sample(const sim::EnvState& state, const std::string& node_id, std::int64_t seq) {
  SensorReading r;
  r.node_id = node_id;
  r.seq = seq;
  r.timestamp_ms = state.sim_time_ms;
  r.temp_c = round_to_tenth(state.temp_c);
  r.moisture_adc = static_cast<int>(std::clamp<long long>(std::llround(state.moisture_adc), 0, 1023));
  r.lux = state.lux;
  return r;
}

SensorNode::SensorNode(NodeConfig config, sim::Environment& env, Connector connector)
    : config_(std::move(config)),
      env_(env),
      connector_(std::move(connector)),
      next_seq_(config_.first_seq),
      next_attempt_ms_(env.state().sim_time_ms) {
  if (config_.cadence_ms <= 0) throw std::invalid_argument("node.cadence_ms must be > 0");
  if (!proto::valid_identifier(config_.node_id)) {
    throw std::invalid_argument("node id '" + config_.node_id + "' is not a valid identifier");
  }
}

void SensorNode::send(const std::string& line) {
  if (!link_) return;
  if (!link_->send(line)) on_disconnect();
}

void SensorNode::on_disconnect() {
  if (link_) {
    link_->close();
    link_.reset();
  }
  session_id_.clear();
  pending_.clear();
  next_attempt_ms_ = now() + kBackoffInitialMs;
  backoff_ms_ = std::min(2 * kBackoffInitialMs, kBackoffCapMs);
}

void SensorNode::maybe_connect() {
  if (link_ && !link_->is_open()) on_disconnect();
  if (link_ || now() < next_attempt_ms_) return;
  link_ = connector_();
  if (!link_) {
    ++counters_.connect_failures;
    next_attempt_ms_ = now() + backoff_ms_;
    backoff_ms_ = std::min(backoff_ms_ * 2, kBackoffCapMs);
    return;
  }
  ++counters_.connects;
  backoff_ms_ = kBackoffInitialMs;
  send(proto::format(proto::Hello{config_.node_id}));
  // Tell the gateway what the relays are doing; it cannot know after a restart.
  send(proto::format(proto::State{now(), env_.actuators()}));
}

void SensorNode::handle_inbound(std::string_view line) {
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, proto::Welcome>) {
          session_id_ = msg.session_id;
        } else if constexpr (std::is_same_v<T, proto::Cmd>) {
          pending_.push_back(msg.command);
        } else if constexpr (std::is_same_v<T, proto::Ping>) {
          send(proto::format(proto::Pong{}));
        } else if constexpr (std::is_same_v<T, proto::ProtocolError>) {
          send(proto::format(proto::Err{msg.reason}));
        }
        // ERR from the gateway needs no reply.
      },
      proto::parse_gateway_line(line));
}

void SensorNode::service_link() {
  while (link_) {
    auto line = link_->try_receive();
    if (!line) break;
    handle_inbound(*line);
  }
  if (link_ && !link_->is_open()) on_disconnect();
}

void SensorNode::apply_pending() {
  auto cmds = std::move(pending_);
  pending_.clear();
  for (const auto& cmd : cmds) {
    ActuatorFlags before = env_.actuators();
    ActuatorFlags after = apply_command(cmd, before);
    env_.set_actuators(after);
    send(proto::format(proto::Ack{cmd.cmd_id}));
    if (after != before) send(proto::format(proto::State{now(), after}));
  }
}

void SensorNode::tick() {
  maybe_connect();
  service_link();
  apply_pending();

  SensorReading r = sample(env_.state(), config_.node_id, next_seq_++);
  if (link_) {
    send(proto::format(proto::to_wire(r)));
    if (link_) {
      ++counters_.frames_sent;
    } else {
      ++counters_.readings_dropped;
    }
  } else {
    ++counters_.readings_dropped;
  }
  env_.advance(config_.cadence_ms);
}

void SensorNode::run_loop(const ScaledClock& clock, std::stop_token stop) {
  using namespace std::chrono;
  while (!stop.stop_requested()) {
    if (clock.now_ms() >= now()) {
      tick();
      continue;
    }
    // Wait for the next tick, but keep the link serviced so PINGs are
    // answered promptly. Slices are short so stop requests are honoured.
    auto wake = std::min(clock.wall_at(now()), steady_clock::now() + milliseconds(50));
    if (link_) {
      auto left = duration_cast<milliseconds>(wake - steady_clock::now());
      if (left.count() > 0) {
        if (auto line = link_->receive_for(left)) handle_inbound(*line);
      }
      if (link_ && !link_->is_open()) on_disconnect();
    } else {
      std::this_thread::sleep_until(wake);
    }
  }
}

}  // namespace microfarm::node
