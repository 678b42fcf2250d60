#include <random>

#include "doctest.h"
#include "microfarm/protocol.hpp"

using namespace microfarm;
using namespace microfarm::proto;

namespace {

template <typename T, typename V>
const T& as(const V& v) {
  REQUIRE(std::holds_alternative<T>(v));
  return std::get<T>(v);
}

std::string random_id(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._:-";
  std::uniform_int_distribution<std::size_t> len(1, 64), ch(0, alphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alphabet[ch(rng)];
  return s;
}

NodeMessage random_node_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<std::int64_t> big(0, 1'000'000'000'000);
  std::uniform_int_distribution<int> tenth(0, 500), adc(0, 1023), lux(1, 65535), bit(0, 1);
  switch (kind(rng)) {
    case 0: return Hello{random_id(rng)};
    case 1: return Sensor{big(rng), big(rng), tenth(rng) / 10.0, adc(rng), lux(rng)};
    case 2: return Ack{big(rng)};
    case 3: return State{big(rng), ActuatorFlags{bit(rng) == 1, bit(rng) == 1, bit(rng) == 1}};
    case 4: return Pong{};
    default: return Err{"reason " + random_id(rng)};
  }
}

GatewayMessage random_gateway_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3), bit(0, 1), act(0, 2);
  std::uniform_int_distribution<std::int64_t> big(0, 1'000'000'000'000);
  switch (kind(rng)) {
    case 0: return Welcome{random_id(rng)};
    case 1:
      return Cmd{RelayCommand{big(rng), kAllActuators[act(rng)], bit(rng) ? Action::On : Action::Off}};
    case 2: return Ping{};
    default: return Err{random_id(rng)};
  }
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("SENSOR example parses") {
  auto s = as<Sensor>(parse_node_line("SENSOR 7 15000 T=31.5 M=290 L=4800"));
  CHECK(s == Sensor{7, 15000, 31.5, 290, 4800});
}

TEST_CASE("missing field is named") {
  auto e = as<ProtocolError>(parse_node_line("SENSOR 7 15000 T=31.5 M=290"));
  CHECK(e.reason == "missing field L");
}

TEST_CASE("grammar violations are typed errors") {
  for (const char* line : {"", "HELLO", "HELLO node-1 2", "HELLO bad/id 1", "SENSOR x 1 T=1.0 M=1 L=1",
                           "SENSOR 1 1 T=51.0 M=1 L=1", "SENSOR 1 1 T=1 M=1 L=1", "SENSOR 1 1 T=1.0 M=1024 L=1",
                           "SENSOR 1 1 T=1.0 M=1 L=0", "SENSOR 1 1 M=1 T=1.0 L=1", "SENSOR 1 1 T=1.0 M=1 L=1 X",
                           "STATE 1 PUMP=2 COOLER=0 LIGHT=0", "ACK -1", "PONG extra", "GET / HTTP/1.1",
                           "SENSOR  1 1 T=1.0 M=1 L=1", "ACK 1\r"}) {
    CAPTURE(line);
    CHECK(std::holds_alternative<ProtocolError>(parse_node_line(line)));
  }
  CHECK(as<ProtocolError>(parse_node_line("FOO 1")).reason.find("FOO") != std::string::npos);
  CHECK(std::holds_alternative<ProtocolError>(parse_node_line(std::string(kMaxLineBytes + 1, 'A'))));
  CHECK(std::holds_alternative<ProtocolError>(parse_gateway_line("CMD 1 FAN ON")));
  CHECK(std::holds_alternative<ProtocolError>(parse_gateway_line("CMD 1 PUMP")));
}

TEST_CASE("gateway messages parse") {
  CHECK(as<Cmd>(parse_gateway_line("CMD 12 COOLER ON")).command ==
        RelayCommand{12, Actuator::Cooler, Action::On});
  CHECK(as<Welcome>(parse_gateway_line("WELCOME s-1")).session_id == "s-1");
  CHECK(std::holds_alternative<Ping>(parse_gateway_line("PING")));
  CHECK(as<Err>(parse_gateway_line("ERR missing field L")).reason == "missing field L");
}

TEST_CASE("format/parse/format is byte-identical over 10000 random frames") {
  std::mt19937_64 rng(20240101);
  for (int i = 0; i < 10000; ++i) {
    const auto m = random_node_message(rng);
    const std::string line = format(m);
    const auto back = parse_node_line(line);
    REQUIRE_FALSE(std::holds_alternative<ProtocolError>(back));
    const auto again = std::visit(
        [](const auto& x) -> std::string {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ProtocolError>) return {};
          else return format(x);
        },
        back);
    REQUIRE(again == line);
  }
  for (int i = 0; i < 2000; ++i) {
    const auto m = random_gateway_message(rng);
    const std::string line = format(m);
    const auto back = parse_gateway_line(line);
    REQUIRE_FALSE(std::holds_alternative<ProtocolError>(back));
    const auto again = std::visit(
        [](const auto& x) -> std::string {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ProtocolError>) return {};
          else return format(x);
        },
        back);
    REQUIRE(again == line);
  }
}

TEST_CASE("ERR reasons are sanitized") {
  CHECK(sanitize_reason("bad\x01\xff byte") == "bad?? byte");
  CHECK(format(Err{"a\nb"}) == "ERR a?b");
}

TEST_CASE("identifiers") {
  CHECK(valid_identifier("node-1"));
  CHECK(valid_identifier(std::string(64, 'a')));
  CHECK_FALSE(valid_identifier(std::string(65, 'a')));
  CHECK_FALSE(valid_identifier(""));
  CHECK_FALSE(valid_identifier("a b"));
}

TEST_CASE("wire conversion keeps one decimal") {
  SensorReading r{"node-1", 3, 9000, 31.46, 290, 4800};
  auto w = to_wire(r);
  CHECK(format(w) == "SENSOR 3 9000 T=31.5 M=290 L=4800");
  CHECK(from_wire(w, "node-1").temp_c == doctest::Approx(31.5));
}

}
