#include <random>

#include "doctest.h"
#include "microfarm/control.hpp"
#include "oracles.hpp"

using namespace microfarm;
using namespace microfarm::control;

namespace {

SensorReading reading(std::int64_t seq, double t, int m, int l) {
  return SensorReading{"node-1", seq, seq * 5000, t, m, l};
}

ControlMode autoMode() { return ControlMode{Mode::Auto, 0, "test"}; }

// Runs a stream through evaluate, applying its commands to the flags.
std::vector<ActuatorFlags> trace(const std::vector<SensorReading>& rs, const Thresholds& th) {
  ActuatorFlags flags;
  std::vector<ActuatorFlags> out;
  for (const auto& r : rs) {
    for (const auto& c : evaluate(r, th, flags, autoMode())) flags.set(c.target, c.action == Action::On);
    out.push_back(flags);
  }
  return out;
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("hysteresis relation at the default setpoints") {
  Thresholds th;
  CHECK(desired_on(Param::Temp, 30.1, false, th));
  CHECK_FALSE(desired_on(Param::Temp, 30.0, false, th));
  CHECK(desired_on(Param::Temp, 29.5, true, th));
  CHECK_FALSE(desired_on(Param::Temp, 29.0, true, th));
  CHECK(desired_on(Param::Moisture, 299, false, th));
  CHECK_FALSE(desired_on(Param::Moisture, 300, false, th));
  CHECK(desired_on(Param::Moisture, 329, true, th));
  CHECK_FALSE(desired_on(Param::Moisture, 330, true, th));
  CHECK(desired_on(Param::Light, 4999, false, th));
  CHECK(desired_on(Param::Light, 5249, true, th));
  CHECK_FALSE(desired_on(Param::Light, 5250, true, th));
}

TEST_CASE("zero band is the bare threshold") {
  Thresholds th;
  th.temp_hyst_c = 0;
  CHECK_FALSE(desired_on(Param::Temp, 30.0, true, th));
  CHECK(desired_on(Param::Temp, 30.1, false, th));
}

TEST_CASE("evaluate orders cooler, pump, light and is silent in MANUAL") {
  Thresholds th;
  auto cmds = evaluate(reading(1, 35.0, 250, 2000), th, {}, autoMode());
  REQUIRE(cmds.size() == 3);
  CHECK(cmds[0] == RelayCommand{0, Actuator::Cooler, Action::On});
  CHECK(cmds[1] == RelayCommand{0, Actuator::Pump, Action::On});
  CHECK(cmds[2] == RelayCommand{0, Actuator::Light, Action::On});
  CHECK(evaluate(reading(1, 35.0, 250, 2000), th, {}, ControlMode{Mode::Manual, 0, "x"}).empty());
  CHECK(evaluate(reading(1, 25.0, 500, 6000), th, {}, autoMode()).empty());
}

TEST_CASE("traces equal the brute-force oracle over random streams") {
  std::mt19937_64 rng(4242);
  for (int s = 0; s < 120; ++s) {
    Thresholds th;
    if (s % 3 == 1) th = Thresholds{28.0, 0.0, 350, 0, 4000, 0};
    if (s % 3 == 2) th = Thresholds{31.0, 2.5, 280, 60, 5500, 700};
    auto rs = oracle::random_stream(rng, 400);
    auto got = trace(rs, th);
    for (std::size_t k = 0; k < rs.size(); ++k) {
      for (Param p : kAllParams) {
        REQUIRE(got[k].get(regulator_for(p)) == oracle::brute_force_on(rs, k, p, th));
      }
    }
  }
}

TEST_CASE("one crossing beyond the band gives exactly one transition each way") {
  Thresholds th;
  std::vector<SensorReading> rs;
  std::int64_t seq = 0;
  for (double t = 28.0; t <= 33.0; t += 0.1) rs.push_back(reading(++seq, round_to_tenth(t), 400, 6000));
  for (int i = 0; i < 20; ++i) rs.push_back(reading(++seq, 33.0, 400, 6000));
  for (double t = 33.0; t >= 27.0; t -= 0.1) rs.push_back(reading(++seq, round_to_tenth(t), 400, 6000));
  int transitions = 0;
  ActuatorFlags flags;
  for (const auto& r : rs) {
    for (const auto& c : evaluate(r, th, flags, autoMode())) {
      CHECK(c.target == Actuator::Cooler);
      flags.set(c.target, c.action == Action::On);
      ++transitions;
    }
  }
  CHECK(transitions == 2);
}

TEST_CASE("engine: belief updates on issue; events carry the cause") {
  ControlEngine e;
  auto ds = e.on_reading(reading(3, 31.5, 290, 4800));
  REQUIRE(ds.size() == 3);
  CHECK(ds[0].event.cause_reading_seq == 3);
  CHECK(ds[0].event.cause_param_value == doctest::Approx(31.5));
  CHECK(ds[1].event.cause_param_value == 290);
  CHECK(ds[0].event.ts_ms == 15000);
  CHECK(e.flags() == ActuatorFlags{true, true, true});
  CHECK(e.on_reading(reading(4, 31.5, 290, 4800)).empty());
}

TEST_CASE("manual commands are rejected in AUTO") {
  ControlEngine e;
  auto r = e.manual_command(Actuator::Pump, Action::On, 100);
  CHECK(std::holds_alternative<Rejected>(r));
  CHECK(e.flags() == ActuatorFlags{});
}

TEST_CASE("manual command in MANUAL; repeats are unchanged") {
  ControlEngine e(Thresholds{}, ControlMode{Mode::Manual, 0, "x"});
  auto r = e.manual_command(Actuator::Light, Action::On, 100);
  REQUIRE(std::holds_alternative<Decision>(r));
  CHECK(std::get<Decision>(r).event.source == EventSource::Manual);
  CHECK(std::holds_alternative<Unchanged>(e.manual_command(Actuator::Light, Action::On, 200)));
  CHECK(e.on_reading(reading(1, 40.0, 0, 1)).empty());
}

TEST_CASE("entering AUTO corrects from the latest reading at the change time") {
  ControlEngine e(Thresholds{}, ControlMode{Mode::Manual, 0, "x"});
  e.on_reading(reading(2, 35.0, 500, 6000));
  auto res = e.set_mode(Mode::Auto, "alice", 20000);
  CHECK(res.changed);
  REQUIRE(res.decisions.size() == 1);
  CHECK(res.decisions[0].event.ts_ms == 20000);
  CHECK_FALSE(e.set_mode(Mode::Auto, "alice", 30000).changed);
}

TEST_CASE("sync_flags respects the mask; revert forces one channel") {
  ControlEngine e;
  e.sync_flags(ActuatorFlags{true, true, true}, ActuatorFlags{true, false, false});
  CHECK(e.flags() == ActuatorFlags{true, false, false});
  e.revert(Actuator::Pump, false);
  CHECK(e.flags() == ActuatorFlags{});
}

TEST_CASE("mutual exclusion over random interleavings") {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> op(0, 9), act(0, 2), bit(0, 1);
  std::uniform_int_distribution<TimeMs> jitter(-7000, 3000);
  for (int run = 0; run < 200; ++run) {
    ControlEngine e(Thresholds{}, ControlMode{bit(rng) ? Mode::Auto : Mode::Manual, 0, "init"});
    std::vector<ControlMode> modes{e.mode()};
    std::vector<ActuationEvent> events;
    auto rs = oracle::random_stream(rng, 120);
    TimeMs now = 0;
    std::size_t next = 0;
    int rejected_in_auto = 0, manual_in_auto = 0;
    while (next < rs.size()) {
      int o = op(rng);
      if (o < 6) {
        // Readings may arrive late relative to the gateway clock.
        auto r = rs[next++];
        now = std::max(now, r.timestamp_ms + jitter(rng));
        for (auto& d : e.on_reading(r)) events.push_back(d.event);
      } else if (o < 8) {
        now += 1000;
        auto res = e.set_mode(bit(rng) ? Mode::Auto : Mode::Manual, "u", now);
        if (res.changed) modes.push_back(res.mode);
        for (auto& d : res.decisions) events.push_back(d.event);
      } else {
        bool was_auto = e.mode().mode == Mode::Auto;
        auto r = e.manual_command(kAllActuators[act(rng)], bit(rng) ? Action::On : Action::Off, now);
        if (was_auto) {
          ++manual_in_auto;
          if (std::holds_alternative<Rejected>(r)) ++rejected_in_auto;
        }
        if (auto* d = std::get_if<Decision>(&r)) events.push_back(d->event);
      }
    }
    CHECK(rejected_in_auto == manual_in_auto);
    for (const auto& ev : events) {
      auto m = oracle::mode_at(modes, ev.ts_ms);
      REQUIRE(m.has_value());
      REQUIRE((ev.source == EventSource::Auto) == (*m == Mode::Auto));
    }
  }
}

TEST_CASE("threshold validation") {
  Thresholds th;
  th.temp_hyst_c = -1;
  CHECK_THROWS_AS(validate(th), std::invalid_argument);
  th = Thresholds{};
  th.lux_min = 0;
  CHECK_THROWS_AS(validate(th), std::invalid_argument);
}

}
