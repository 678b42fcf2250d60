#include "microfarm/gateway.hpp"

#include <algorithm>
#include <type_traits>

#include "json.hpp"

namespace microfarm::gateway {

using nlohmann::json;

std::string_view to_string(Delivery d) {
  switch (d) {
    case Delivery::Pending: return "pending";
    case Delivery::Delivered: return "delivered";
    case Delivery::TimedOut: return "timed-out";
    case Delivery::NotConnected: return "not-connected";
  }
  return "?";
}

Delivery CommandTicket::outcome() const {
  std::lock_guard lk(mu_);
  return outcome_;
}

Delivery CommandTicket::wait_for(std::chrono::milliseconds timeout) const {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return outcome_ != Delivery::Pending; });
  return outcome_;
}

void CommandTicket::resolve(Delivery d) {
  {
    std::lock_guard lk(mu_);
    if (outcome_ != Delivery::Pending) return;
    outcome_ = d;
  }
  cv_.notify_all();
}

std::string reading_json(const SensorReading& r) {
  return json{{"node_id", r.node_id},     {"seq", r.seq}, {"ts_ms", r.timestamp_ms},
              {"temp_c", r.temp_c},       {"moisture_adc", r.moisture_adc},
              {"lux", r.lux}}
      .dump();
}

std::string event_json(const ActuationEvent& e) {
  json j{{"ts_ms", e.ts_ms},
         {"actuator", to_string(e.actuator)},
         {"action", to_string(e.action)},
         {"source", to_string(e.source)}};
  j["cause_seq"] = e.cause_reading_seq ? json(*e.cause_reading_seq) : json(nullptr);
  j["cause_value"] = e.cause_param_value ? json(*e.cause_param_value) : json(nullptr);
  return j.dump();
}

std::string mode_json(const ControlMode& m) {
  return json{{"mode", to_string(m.mode)}, {"changed_at_ms", m.changed_at_ms}, {"changed_by", m.changed_by}}
      .dump();
}

GatewayCore::GatewayCore(GatewayConfig config, const Clock& clock, store::Datastore& store,
                         control::ControlEngine& engine, EventBus& bus)
    : config_(std::move(config)), clock_(clock), store_(store), engine_(engine), bus_(bus) {
  if (config_.cadence_ms <= 0) throw std::invalid_argument("cadence must be > 0");
  auto modes = store_.modes();
  ControlMode current = engine_.mode();
  if (modes.empty() || modes.back().mode != current.mode) store_.append_mode(current);
  for (const auto& e : store_.events()) last_logged_[e.actuator] = e.action;
}

GatewayCore::SessionHandle GatewayCore::open_session(std::shared_ptr<LineLink> link) {
  std::lock_guard lk(mu_);
  SessionHandle h = next_handle_++;
  Session s;
  s.link = std::move(link);
  s.info.session_id = "s-" + std::to_string(h);
  s.info.connected_at_ms = clock_.now_ms();
  sessions_.emplace(h, std::move(s));
  return h;
}

bool GatewayCore::session_open(SessionHandle session) const {
  std::lock_guard lk(mu_);
  return sessions_.count(session) != 0;
}

std::size_t GatewayCore::session_count() const {
  std::lock_guard lk(mu_);
  return sessions_.size();
}

void GatewayCore::send_locked(SessionHandle h, Session& s, const std::string& line) {
  if (!s.link->send(line)) close_locked(h);
}

void GatewayCore::close_locked(SessionHandle h) {
  auto it = sessions_.find(h);
  if (it == sessions_.end()) return;
  it->second.link->close();
  if (it->second.hello) {
    auto bn = by_node_.find(it->second.info.node_id);
    if (bn != by_node_.end() && bn->second == h) by_node_.erase(bn);
  }
  sessions_.erase(it);
}

void GatewayCore::close_session(SessionHandle session) {
  std::lock_guard lk(mu_);
  close_locked(session);
}

GatewayCore::Session* GatewayCore::live_session_locked(const std::string& node_id) {
  auto bn = by_node_.find(node_id);
  if (bn == by_node_.end()) return nullptr;
  auto it = sessions_.find(bn->second);
  return it == sessions_.end() ? nullptr : &it->second;
}

LineResult GatewayCore::on_line(SessionHandle h, std::string_view line) {
  std::lock_guard lk(mu_);
  auto it = sessions_.find(h);
  if (it == sessions_.end()) return LineResult::Closed;
  Session& s = it->second;
  const auto msg = proto::parse_node_line(line);

  LineResult result = LineResult::Ignored;
  if (!s.hello) {
    result = handle_hello(h, s, msg);
  } else {
    result = std::visit(
        [&](const auto& m) -> LineResult {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, proto::ProtocolError>) {
            send_locked(h, s, proto::format(proto::Err{m.reason}));
            return LineResult::ProtocolError;
          } else if constexpr (std::is_same_v<T, proto::Hello>) {
            send_locked(h, s, proto::format(proto::Err{"duplicate HELLO"}));
            return LineResult::ProtocolError;
          } else if constexpr (std::is_same_v<T, proto::Sensor>) {
            return handle_sensor(s, m);
          } else if constexpr (std::is_same_v<T, proto::Ack>) {
            return handle_ack(s, m);
          } else if constexpr (std::is_same_v<T, proto::State>) {
            return handle_state(s, m);
          } else if constexpr (std::is_same_v<T, proto::Pong>) {
            return LineResult::Accepted;
          } else {
            return LineResult::Ignored;  // ERR from the node
          }
        },
        msg);
  }
  poll_locked(clock_.now_ms());
  return result;
}

LineResult GatewayCore::handle_hello(SessionHandle h, Session& s, const proto::NodeParse& msg) {
  const auto* hello = std::get_if<proto::Hello>(&msg);
  if (!hello) {
    std::string reason = "expected HELLO";
    if (const auto* e = std::get_if<proto::ProtocolError>(&msg)) reason += ": " + e->reason;
    send_locked(h, s, proto::format(proto::Err{reason}));
    close_locked(h);
    return LineResult::Closed;
  }
  // Newest session wins.
  if (auto bn = by_node_.find(hello->node_id); bn != by_node_.end() && bn->second != h) {
    close_locked(bn->second);
  }
  s.hello = true;
  s.info.node_id = hello->node_id;
  by_node_[hello->node_id] = h;
  send_locked(h, s, proto::format(proto::Welcome{s.info.session_id}));
  return LineResult::Accepted;
}

LineResult GatewayCore::handle_sensor(Session& s, const proto::Sensor& m) {
  if (m.seq <= s.info.last_seq) return LineResult::Duplicate;
  s.info.last_seq = m.seq;
  SensorReading r = proto::from_wire(m, s.info.node_id);
  if (!store_.append_reading(r)) return LineResult::Duplicate;
  bus_.publish({"reading", reading_json(r)});
  if (r.node_id == config_.primary_node) {
    for (auto& d : engine_.on_reading(r)) {
      dispatch_locked(r.node_id, d.command.target, d.command.action, d.event);
    }
  }
  return LineResult::Accepted;
}

LineResult GatewayCore::handle_ack(Session& s, const proto::Ack& m) {
  auto it = pending_.find(m.cmd_id);
  if (it == pending_.end() || it->second.node_id != s.info.node_id) return LineResult::Ignored;
  Pending p = std::move(it->second);
  pending_.erase(it);
  s.info.pending_acks.erase(m.cmd_id);
  p.ticket->resolve(Delivery::Delivered);
  if (p.event) log_event_locked(*p.event);
  if (p.node_id == config_.primary_node) {
    reported_.set(p.target, p.action == Action::On);
  }
  return LineResult::Accepted;
}

LineResult GatewayCore::handle_state(Session& s, const proto::State& m) {
  if (s.info.node_id != config_.primary_node) return LineResult::Accepted;
  reported_ = m.flags;
  ActuatorFlags mask;
  for (Actuator a : kAllActuators) mask.set(a, !has_pending_locked(a));
  engine_.sync_flags(reported_, mask);
  return LineResult::Accepted;
}

bool GatewayCore::has_pending_locked(Actuator a) const {
  TimeMs now = clock_.now_ms();
  return std::any_of(pending_.begin(), pending_.end(), [&](const auto& kv) {
    return kv.second.target == a && kv.second.node_id == config_.primary_node &&
           kv.second.deadline_ms > now;
  });
}

void GatewayCore::log_event_locked(const ActuationEvent& e) {
  // The event log alternates per actuator; a repeat means the node was
  // already in that state (e.g. a retried command), so nothing changed.
  auto last = last_logged_.find(e.actuator);
  if (last != last_logged_.end() && last->second == e.action) return;
  if (last == last_logged_.end() && e.action == Action::Off) return;
  last_logged_[e.actuator] = e.action;
  store_.append_event(e);
  bus_.publish({"actuation", event_json(e)});
}

std::shared_ptr<CommandTicket> GatewayCore::dispatch_locked(const std::string& node_id, Actuator target,
                                                            Action action,
                                                            std::optional<ActuationEvent> event) {
  Session* s = live_session_locked(node_id);
  if (!s) {
    if (node_id == config_.primary_node) engine_.revert(target, reported_.get(target));
    return std::make_shared<CommandTicket>(0, Delivery::NotConnected);
  }
  const std::int64_t id = next_cmd_id_++;
  auto ticket = std::make_shared<CommandTicket>(id, Delivery::Pending);
  const SessionHandle h = by_node_.at(node_id);
  const TimeMs now = clock_.now_ms();
  Pending p{node_id, h, target, action, std::move(event), now + 3 * config_.cadence_ms, ticket};
  pending_.emplace(id, std::move(p));
  s->info.pending_acks.insert(id);
  send_locked(h, *s, proto::format(proto::Cmd{RelayCommand{id, target, action}}));
  if (sessions_.count(h) == 0) {
    pending_.erase(id);
    ticket->resolve(Delivery::NotConnected);
    if (node_id == config_.primary_node) engine_.revert(target, reported_.get(target));
  }
  return ticket;
}

std::shared_ptr<CommandTicket> GatewayCore::dispatch_command(const std::string& node_id, Actuator target,
                                                             Action action,
                                                             std::optional<ActuationEvent> event) {
  std::lock_guard lk(mu_);
  return dispatch_locked(node_id, target, action, std::move(event));
}

void GatewayCore::poll_locked(TimeMs now) {
  for (auto it = pending_.begin(); it != pending_.end();) {
    Pending& p = it->second;
    if (p.ticket->outcome() == Delivery::Pending && now >= p.deadline_ms) {
      p.ticket->resolve(Delivery::TimedOut);
      if (auto sit = sessions_.find(p.session); sit != sessions_.end()) {
        sit->second.info.pending_acks.erase(it->first);
      }
      if (p.node_id == config_.primary_node && !has_pending_locked(p.target)) {
        engine_.revert(p.target, reported_.get(p.target));
      }
    }
    // A late ACK still records the transition; forget it eventually.
    if (now >= p.deadline_ms + 20 * config_.cadence_ms) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

void GatewayCore::poll() {
  std::lock_guard lk(mu_);
  poll_locked(clock_.now_ms());
}

void GatewayCore::ping_all() {
  std::lock_guard lk(mu_);
  std::vector<SessionHandle> hs;
  for (auto& [h, s] : sessions_) {
    if (s.hello) hs.push_back(h);
  }
  for (auto h : hs) {
    auto it = sessions_.find(h);
    if (it != sessions_.end()) send_locked(h, it->second, proto::format(proto::Ping{}));
  }
}

ApiSnapshot GatewayCore::snapshot() const {
  ApiSnapshot snap;
  snap.reading = store_.latest_reading();
  snap.mode = engine_.mode();
  {
    std::lock_guard lk(mu_);
    snap.actuators = reported_;
  }
  snap.stale = !snap.reading || clock_.now_ms() - snap.reading->timestamp_ms > 3 * config_.cadence_ms;
  return snap;
}

ActuatorFlags GatewayCore::reported_flags() const {
  std::lock_guard lk(mu_);
  return reported_;
}

control::ModeResult GatewayCore::set_mode(Mode mode, const std::string& by) {
  if (!store::valid_label(by)) throw std::invalid_argument("bad user name");
  std::lock_guard lk(mu_);
  auto res = engine_.set_mode(mode, by, clock_.now_ms());
  if (!res.changed) return res;
  store_.append_mode(res.mode);
  bus_.publish({"mode", mode_json(res.mode)});
  for (auto& d : res.decisions) {
    dispatch_locked(config_.primary_node, d.command.target, d.command.action, d.event);
  }
  return res;
}

ManualOutcome GatewayCore::manual_command(Actuator target, Action action) {
  std::lock_guard lk(mu_);
  ManualOutcome out;
  if (engine_.mode().mode == Mode::Auto) {
    out.status = ManualStatus::Conflict;
    out.reason = "manual override is disabled while automatic control is active";
    return out;
  }
  if (!live_session_locked(config_.primary_node)) {
    out.status = ManualStatus::NotConnected;
    out.reason = "sensor node not connected";
    return out;
  }
  auto r = engine_.manual_command(target, action, clock_.now_ms());
  if (auto* d = std::get_if<control::Decision>(&r)) {
    out.ticket = dispatch_locked(config_.primary_node, target, action, d->event);
    out.status = out.ticket->outcome() == Delivery::NotConnected ? ManualStatus::NotConnected
                                                                 : ManualStatus::Accepted;
  } else if (std::holds_alternative<control::Unchanged>(r)) {
    out.status = ManualStatus::Unchanged;
  } else {
    out.status = ManualStatus::Conflict;
    out.reason = std::get<control::Rejected>(r).reason;
  }
  return out;
}

bool GatewayCore::node_connected(const std::string& node_id) const {
  std::lock_guard lk(mu_);
  return by_node_.count(node_id) != 0;
}

std::optional<NodeSession> GatewayCore::session_for(const std::string& node_id) const {
  std::lock_guard lk(mu_);
  auto bn = by_node_.find(node_id);
  if (bn == by_node_.end()) return std::nullopt;
  auto it = sessions_.find(bn->second);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.info;
}

NodeListener::NodeListener(GatewayCore& core, const Endpoint& ep) : core_(core), listener_(ep) {}

NodeListener::~NodeListener() { stop(); }

void NodeListener::start() {
  running_ = true;
  listener_.start([this](std::unique_ptr<TcpLink> link) {
    std::shared_ptr<TcpLink> shared(std::move(link));
    std::lock_guard lk(mu_);
    if (!running_) return;
    links_.push_back(shared);
    threads_.emplace_back([this, shared] { serve(shared); });
  });
  housekeeper_ = std::thread([this] {
    auto next_ping = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    while (running_) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      core_.poll();
      if (std::chrono::steady_clock::now() >= next_ping) {
        core_.ping_all();
        next_ping += std::chrono::seconds(10);
      }
    }
  });
}

void NodeListener::serve(std::shared_ptr<TcpLink> link) {
  auto h = core_.open_session(link);
  while (running_ && core_.session_open(h)) {
    auto line = link->receive_for(std::chrono::milliseconds(100));
    if (line) {
      if (core_.on_line(h, *line) == LineResult::Closed) break;
    } else if (!link->is_open()) {
      break;
    }
  }
  core_.close_session(h);
}

void NodeListener::stop() {
  if (!running_.exchange(false)) return;
  listener_.stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lk(mu_);
    for (auto& w : links_) {
      if (auto l = w.lock()) l->close();
    }
    threads.swap(threads_);
  }
  for (auto& t : threads) t.join();
  if (housekeeper_.joinable()) housekeeper_.join();
}

}  // namespace microfarm::gateway
