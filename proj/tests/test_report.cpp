#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "microfarm/report.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace microfarm;
using namespace microfarm::report;

namespace {

std::vector<SensorReading> day_with(auto temp_at) {
  std::vector<SensorReading> rs;
  for (int i = 0; i < 17280; ++i) {
    rs.push_back(SensorReading{"node-1", i + 1, i * 5000LL, round_to_tenth(temp_at(i)), 500, 6000});
  }
  return rs;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("one excursion above 30 C gives one COOLER ON and one OFF") {
  auto rs = day_with([](int i) { return i > 5000 && i < 6000 ? 32.0 : 27.0; });
  auto ev = replay_events(rs, {});
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].actuator == Actuator::Cooler);
  CHECK(ev[0].action == Action::On);
  CHECK(ev[0].ts_ms == 5001 * 5000LL);
  CHECK(ev[1].action == Action::Off);
  CHECK(ev[1].ts_ms == 6000 * 5000LL);
}

TEST_CASE("an all-in-range day replays to a header only") {
  auto rs = day_with([](int) { return 25.0; });
  CHECK(events_csv(replay_events(rs, {})) == "ts_ms,actuator,action,source,cause_seq,cause_value\n");
}

TEST_CASE("replay is deterministic") {
  std::mt19937_64 rng(8);
  auto rs = oracle::random_stream(rng, 5000);
  CHECK(events_csv(replay_events(rs, {})) == events_csv(replay_events(rs, {})));
}

TEST_CASE("replayed traces match the brute-force oracle") {
  std::mt19937_64 rng(21);
  for (int s = 0; s < 30; ++s) {
    auto rs = oracle::random_stream(rng, 300);
    auto ev = replay_events(rs, {});
    for (Param p : kAllParams) {
      auto tr = oracle::trace_from_events(rs, ev, regulator_for(p));
      for (std::size_t k = 0; k < rs.size(); ++k) REQUIRE(tr[k] == oracle::brute_force_on(rs, k, p, {}));
    }
  }
}

TEST_CASE("report on-intervals match the event transitions") {
  std::mt19937_64 rng(3);
  auto rs = oracle::random_stream(rng, 2000);
  auto ev = replay_events(rs, {});
  auto files = build_report(rs, ev, 1);
  REQUIRE(files.size() == 6);
  for (Param p : kAllParams) {
    const std::string name(to_string(p));
    auto trace = oracle::trace_from_events(rs, ev, regulator_for(p));
    std::string expect = "ts_ms,on\n";
    std::string values = "ts_ms,value\n";
    for (std::size_t k = 0; k < rs.size(); ++k) {
      expect += std::to_string(rs[k].timestamp_ms) + (trace[k] ? ",1\n" : ",0\n");
      values += std::to_string(rs[k].timestamp_ms) + "," +
                (p == Param::Temp ? format_temp(rs[k].temp_c) : std::to_string(static_cast<int>(rs[k].value(p)))) + "\n";
    }
    CHECK(files[name + "_regulator.csv"] == expect);
    CHECK(files[name + "_values.csv"] == values);
  }
}

TEST_CASE("days partition the timeline; empty day is headers only") {
  std::vector<SensorReading> rs{{"node-1", 1, kDayMs - 1, 31.0, 100, 100}, {"node-1", 2, kDayMs, 31.0, 100, 100}};
  auto ev = replay_events(rs, {});
  auto d1 = build_report(rs, ev, 1);
  auto d2 = build_report(rs, ev, 2);
  auto d3 = build_report(rs, ev, 3);
  CHECK(d1["temp_values.csv"] == "ts_ms,value\n86399999,31.0\n");
  CHECK(d2["temp_regulator.csv"] == "ts_ms,on\n86400000,1\n");
  CHECK(d3["light_values.csv"] == "ts_ms,value\n");
}

TEST_CASE("missing files are an error") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(report_from_dir(dir.path(), 1), ReportError);
}

}
