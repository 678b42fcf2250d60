#ifndef MICROFARM_PROTOCOL_HPP
#define MICROFARM_PROTOCOL_HPP

// Node <-> gateway line protocol. One ASCII message per '\n'-terminated line.
//
//   node -> gateway                          gateway -> node
//   HELLO <node_id> 1                        WELCOME <session_id>
//   SENSOR <seq> <ts_ms> T=<t.t> M=<n> L=<n> CMD <cmd_id> <PUMP|COOLER|LIGHT> <ON|OFF>
//   ACK <cmd_id>                             PING
//   STATE <ts_ms> PUMP=<0|1> COOLER=<0|1> LIGHT=<0|1>
//   PONG
//   ERR <reason>  (either direction)
//
// Parsers take a line with the terminator already stripped and never throw.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "microfarm/types.hpp"

namespace microfarm::proto {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxLineBytes = 512;

struct Hello {
  std::string node_id;
  friend bool operator==(const Hello&, const Hello&) = default;
};
struct Sensor {
  std::int64_t seq = 0;
  TimeMs timestamp_ms = 0;
  double temp_c = 0.0;
  int moisture_adc = 0;
  int lux = 1;
  friend bool operator==(const Sensor&, const Sensor&) = default;
};
struct Ack {
  std::int64_t cmd_id = 0;
  friend bool operator==(const Ack&, const Ack&) = default;
};
struct State {
  TimeMs timestamp_ms = 0;
  ActuatorFlags flags;
  friend bool operator==(const State&, const State&) = default;
};
struct Pong {
  friend bool operator==(const Pong&, const Pong&) = default;
};
struct Welcome {
  std::string session_id;
  friend bool operator==(const Welcome&, const Welcome&) = default;
};
struct Cmd {
  RelayCommand command;
  friend bool operator==(const Cmd&, const Cmd&) = default;
};
struct Ping {
  friend bool operator==(const Ping&, const Ping&) = default;
};
struct Err {
  std::string reason;
  friend bool operator==(const Err&, const Err&) = default;
};

// A line that does not follow the grammar. `reason` names the offending
// token or field, e.g. "missing field L".
struct ProtocolError {
  std::string reason;
  friend bool operator==(const ProtocolError&, const ProtocolError&) = default;
};

using NodeMessage = std::variant<Hello, Sensor, Ack, State, Pong, Err>;
using GatewayMessage = std::variant<Welcome, Cmd, Ping, Err>;

using NodeParse = std::variant<Hello, Sensor, Ack, State, Pong, Err, ProtocolError>;
using GatewayParse = std::variant<Welcome, Cmd, Ping, Err, ProtocolError>;

NodeParse parse_node_line(std::string_view line);
GatewayParse parse_gateway_line(std::string_view line);

std::string format(const Hello& m);
std::string format(const Sensor& m);
std::string format(const Ack& m);
std::string format(const State& m);
std::string format(const Pong& m);
std::string format(const Welcome& m);
std::string format(const Cmd& m);
std::string format(const Ping& m);
std::string format(const Err& m);
std::string format(const NodeMessage& m);
std::string format(const GatewayMessage& m);

// Node ids and session ids: 1..64 bytes of [A-Za-z0-9._:-].
bool valid_identifier(std::string_view id);

// Replaces bytes outside printable ASCII so the text can travel in an ERR line.
std::string sanitize_reason(std::string_view text);

Sensor to_wire(const SensorReading& r);
SensorReading from_wire(const Sensor& s, std::string node_id);

}  // namespace microfarm::proto

#endif  // MICROFARM_PROTOCOL_HPP
