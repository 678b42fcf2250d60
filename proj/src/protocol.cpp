#include "microfarm/protocol.hpp"

#include <charconv>
#include <vector>

namespace microfarm::proto {

namespace {

constexpr std::size_t kMaxIdentifier = 64;

bool is_printable(char c) { return c >= 0x20 && c < 0x7f; }

// Splits on single spaces. Empty tokens (leading, trailing or doubled
// separators) are kept so the caller can reject them.
std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t sp = line.find(' ', start);
    if (sp == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, sp - start));
    start = sp + 1;
  }
}

std::string quote(std::string_view tok) {
  std::string s = "'";
  s += sanitize_reason(tok.substr(0, 32));
  if (tok.size() > 32) s += "...";
  s += "'";
  return s;
}

bool parse_nonneg(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

// "<digits>.<digit>"
bool parse_tenths(std::string_view s, double& out) {
  std::size_t dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 2 != s.size()) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == dot) continue;
    if (s[i] < '0' || s[i] > '9') return false;
  }
  if (dot > 6) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

struct Fields {
  std::vector<std::string_view> tok;
  std::string error;

  bool fail(std::string msg) {
    if (error.empty()) error = std::move(msg);
    return false;
  }
};

// Checks arity: names[i] labels tok[i + 1]. Reports the first missing field
// or the first surplus token.
bool check_arity(Fields& f, std::initializer_list<const char*> names) {
  const std::size_t want = names.size() + 1;
  if (f.tok.size() < want) {
    return f.fail(std::string("missing field ") + names.begin()[f.tok.size() - 1]);
  }
  if (f.tok.size() > want) return f.fail("unexpected token " + quote(f.tok[want]));
  return true;
}

bool int_field(Fields& f, std::size_t i, const char* name, std::int64_t& out) {
  if (!parse_nonneg(f.tok[i], out)) {
    return f.fail(std::string("bad value for ") + name + ": " + quote(f.tok[i]));
  }
  return true;
}

bool keyed(Fields& f, std::size_t i, std::string_view key, std::string_view& value) {
  std::string_view t = f.tok[i];
  if (t.size() < key.size() + 1 || t.substr(0, key.size()) != key || t[key.size()] != '=') {
    return f.fail("missing field " + std::string(key) + " (got " + quote(t) + ")");
  }
  value = t.substr(key.size() + 1);
  return true;
}

bool flag_field(Fields& f, std::size_t i, std::string_view key, bool& out) {
  std::string_view v;
  if (!keyed(f, i, key, v)) return false;
  if (v == "0") {
    out = false;
  } else if (v == "1") {
    out = true;
  } else {
    return f.fail("bad value for " + std::string(key) + ": " + quote(v));
  }
  return true;
}

// Shared front end: rejects bytes a line may not carry and empty tokens.
bool prescan(std::string_view line, Fields& f) {
  if (line.empty()) return f.fail("empty line");
  if (line.size() > kMaxLineBytes) return f.fail("line too long");
  for (char c : line) {
    if (!is_printable(c)) return f.fail("non-printable byte in line");
  }
  f.tok = tokenize(line);
  for (std::size_t i = 0; i < f.tok.size(); ++i) {
    if (f.tok[i].empty()) {
      // Trailing text after an ERR keyword is free-form; only structure matters.
      if (f.tok[0] == "ERR") break;
      return f.fail("empty token at position " + std::to_string(i));
    }
  }
  return true;
}

std::optional<Err> parse_err(std::string_view line, const Fields& f) {
  if (f.tok[0] != "ERR") return std::nullopt;
  Err e;
  if (line.size() > 4) e.reason = std::string(line.substr(4));
  return e;
}

}  // namespace

bool valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > kMaxIdentifier) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '.' || c == '_' || c == ':' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string sanitize_reason(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) out += is_printable(c) ? c : '?';
  return out;
}

NodeParse parse_node_line(std::string_view line) {
  Fields f;
  if (!prescan(line, f)) return ProtocolError{f.error};
  if (auto e = parse_err(line, f)) return *e;

  const std::string_view kw = f.tok[0];
  if (kw == "HELLO") {
    if (!check_arity(f, {"node_id", "version"})) return ProtocolError{f.error};
    if (!valid_identifier(f.tok[1])) return ProtocolError{"bad node_id " + quote(f.tok[1])};
    if (f.tok[2] != "1") return ProtocolError{"unsupported protocol version " + quote(f.tok[2])};
    return Hello{std::string(f.tok[1])};
  }
  if (kw == "SENSOR") {
    if (!check_arity(f, {"seq", "timestamp_ms", "T", "M", "L"})) return ProtocolError{f.error};
    Sensor s;
    std::int64_t adc = 0, lux = 0;
    std::string_view tv, mv, lv;
    if (!int_field(f, 1, "seq", s.seq) || !int_field(f, 2, "timestamp_ms", s.timestamp_ms) ||
        !keyed(f, 3, "T", tv) || !keyed(f, 4, "M", mv) || !keyed(f, 5, "L", lv)) {
      return ProtocolError{f.error};
    }
    if (!parse_tenths(tv, s.temp_c) || s.temp_c > 50.0) {
      return ProtocolError{"bad value for T: " + quote(tv)};
    }
    if (!parse_nonneg(mv, adc) || adc > 1023) {
      return ProtocolError{"bad value for M: " + quote(mv)};
    }
    if (!parse_nonneg(lv, lux) || lux < 1 || lux > 65535) {
      return ProtocolError{"bad value for L: " + quote(lv)};
    }
    s.moisture_adc = static_cast<int>(adc);
    s.lux = static_cast<int>(lux);
    return s;
  }
  if (kw == "ACK") {
    Ack a;
    if (!check_arity(f, {"cmd_id"}) || !int_field(f, 1, "cmd_id", a.cmd_id)) {
      return ProtocolError{f.error};
    }
    return a;
  }
  if (kw == "STATE") {
    State s;
    if (!check_arity(f, {"timestamp_ms", "PUMP", "COOLER", "LIGHT"}) ||
        !int_field(f, 1, "timestamp_ms", s.timestamp_ms) ||
        !flag_field(f, 2, "PUMP", s.flags.pump) || !flag_field(f, 3, "COOLER", s.flags.cooler) ||
        !flag_field(f, 4, "LIGHT", s.flags.light)) {
      return ProtocolError{f.error};
    }
    return s;
  }
  if (kw == "PONG") {
    if (!check_arity(f, {})) return ProtocolError{f.error};
    return Pong{};
  }
  return ProtocolError{"unknown message " + quote(kw)};
}

GatewayParse parse_gateway_line(std::string_view line) {
  Fields f;
  if (!prescan(line, f)) return ProtocolError{f.error};
  if (auto e = parse_err(line, f)) return *e;

  const std::string_view kw = f.tok[0];
  if (kw == "WELCOME") {
    if (!check_arity(f, {"session_id"})) return ProtocolError{f.error};
    if (!valid_identifier(f.tok[1])) return ProtocolError{"bad session_id " + quote(f.tok[1])};
    return Welcome{std::string(f.tok[1])};
  }
  if (kw == "CMD") {
    Cmd c;
    if (!check_arity(f, {"cmd_id", "target", "action"}) ||
        !int_field(f, 1, "cmd_id", c.command.cmd_id)) {
      return ProtocolError{f.error};
    }
    auto target = parse_actuator(f.tok[2]);
    if (!target) return ProtocolError{"bad value for target: " + quote(f.tok[2])};
    auto action = parse_action(f.tok[3]);
    if (!action) return ProtocolError{"bad value for action: " + quote(f.tok[3])};
    c.command.target = *target;
    c.command.action = *action;
    return c;
  }
  if (kw == "PING") {
    if (!check_arity(f, {})) return ProtocolError{f.error};
    return Ping{};
  }
  return ProtocolError{"unknown message " + quote(kw)};
}

std::string format(const Hello& m) { return "HELLO " + m.node_id + " 1"; }

std::string format(const Sensor& m) {
  return "SENSOR " + std::to_string(m.seq) + " " + std::to_string(m.timestamp_ms) +
         " T=" + format_temp(m.temp_c) + " M=" + std::to_string(m.moisture_adc) +
         " L=" + std::to_string(m.lux);
}

std::string format(const Ack& m) { return "ACK " + std::to_string(m.cmd_id); }

std::string format(const State& m) {
  auto bit = [](bool b) { return b ? "1" : "0"; };
  return "STATE " + std::to_string(m.timestamp_ms) + " PUMP=" + bit(m.flags.pump) +
         " COOLER=" + bit(m.flags.cooler) + " LIGHT=" + bit(m.flags.light);
}

std::string format(const Pong&) { return "PONG"; }
std::string format(const Welcome& m) { return "WELCOME " + m.session_id; }

std::string format(const Cmd& m) {
  return "CMD " + std::to_string(m.command.cmd_id) + " " +
         std::string(to_string(m.command.target)) + " " +
         std::string(to_string(m.command.action));
}

std::string format(const Ping&) { return "PING"; }
std::string format(const Err& m) { return "ERR " + sanitize_reason(m.reason); }

std::string format(const NodeMessage& m) {
  return std::visit([](const auto& v) { return format(v); }, m);
}

std::string format(const GatewayMessage& m) {
  return std::visit([](const auto& v) { return format(v); }, m);
}

Sensor to_wire(const SensorReading& r) {
  return Sensor{r.seq, r.timestamp_ms, round_to_tenth(r.temp_c), r.moisture_adc, r.lux};
}

SensorReading from_wire(const Sensor& s, std::string node_id) {
  return SensorReading{std::move(node_id), s.seq, s.timestamp_ms, s.temp_c, s.moisture_adc, s.lux};
}

}  // namespace microfarm::proto
