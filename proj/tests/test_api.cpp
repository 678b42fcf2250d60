#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "microfarm/api.hpp"
#include "test_util.hpp"

using namespace microfarm;
using nlohmann::json;

namespace {

struct Rig {
  testutil::TempDir dir;
  ManualClock clock{0};
  store::Datastore store{store::StoreConfig{dir.path(), 48}};
  control::ControlEngine engine;
  EventBus bus;
  gateway::GatewayCore core{gateway::GatewayConfig{}, clock, store, engine, bus};
  api::Router router{core};
  std::unique_ptr<MemoryLink> node;
  gateway::GatewayCore::SessionHandle h = 0;

  void connect() {
    auto [a, b] = make_memory_link();
    node = std::move(a);
    h = core.open_session(std::shared_ptr<LineLink>(std::move(b)));
    core.on_line(h, "HELLO node-1 1");
  }

  api::Response call(const std::string& method, const std::string& path, std::map<std::string, std::string> q = {},
                     std::string body = {}) {
    return router.handle(api::Request{method, path, std::move(q), std::move(body)});
  }
};

std::string heights_csv() {
  std::ifstream in(std::filesystem::path(MICROFARM_SOURCE_DIR) / "data" / "mustard_heights.csv");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("api") {

TEST_CASE("snapshot before and after a reading") {
  Rig rig;
  auto r = rig.call("GET", "/api/v1/snapshot");
  CHECK(r.status == 200);
  auto j = json::parse(r.body);
  CHECK(j["temp_c"].is_null());
  CHECK(j["stale"] == true);
  CHECK(j["mode"] == "AUTO");
  rig.connect();
  rig.clock.set(15000);
  rig.core.on_line(rig.h, "SENSOR 7 15000 T=31.5 M=290 L=4800");
  j = json::parse(rig.call("GET", "/api/v1/snapshot").body);
  CHECK(j["temp_c"] == 31.5);
  CHECK(j["moisture_adc"] == 290);
  CHECK(j["lux"] == 4800);
  CHECK(j["reading_ts_ms"] == 15000);
  CHECK(j["stale"] == false);
  CHECK(j["actuators"]["pump"] == false);
}

TEST_CASE("history") {
  Rig rig;
  rig.connect();
  for (int i = 1; i <= 10; ++i) {
    rig.core.on_line(rig.h, "SENSOR " + std::to_string(i) + " " + std::to_string(i * 1000) + " T=25.0 M=500 L=6000");
  }
  rig.clock.set(10000);
  auto r = rig.call("GET", "/api/v1/history", {{"param", "light"}, {"window_s", "3"}});
  CHECK(r.status == 200);
  auto j = json::parse(r.body);
  REQUIRE(j.size() == 4);
  CHECK(j[0]["ts_ms"] == 7000);
  CHECK(j[0]["value"] == 6000);
  CHECK(rig.call("GET", "/api/v1/history", {{"param", "humidity"}}).status == 400);
  CHECK(rig.call("GET", "/api/v1/history", {{"param", "temp"}, {"window_s", "-5"}}).status == 400);
  CHECK(rig.call("GET", "/api/v1/history", {{"param", "temp"}, {"window_s", "x"}}).status == 400);
}

TEST_CASE("mode and actuators") {
  Rig rig;
  CHECK(rig.call("PUT", "/api/v1/mode", {}, R"({"mode":"SOMETIMES"})").status == 400);
  CHECK(rig.call("PUT", "/api/v1/mode", {}, "not json").status == 400);
  CHECK(rig.call("POST", "/api/v1/actuators/pump", {}, R"({"action":"ON"})").status == 409);
  auto r = rig.call("PUT", "/api/v1/mode", {}, R"({"mode":"MANUAL"})");
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["mode"] == "MANUAL");
  CHECK(rig.call("POST", "/api/v1/actuators/pump", {}, R"({"action":"ON"})").status == 503);
  rig.connect();
  r = rig.call("POST", "/api/v1/actuators/pump", {}, R"({"action":"ON"})");
  CHECK(r.status == 202);
  CHECK(json::parse(r.body)["result"] == "accepted");
  CHECK(rig.call("POST", "/api/v1/actuators/fan", {}, R"({"action":"ON"})").status == 404);
  CHECK(rig.call("POST", "/api/v1/actuators/light", {}, R"({"action":"MAYBE"})").status == 400);
  auto a = json::parse(rig.call("GET", "/api/v1/actuators").body);
  CHECK(a["mode"] == "MANUAL");
  CHECK(a.contains("pump"));
  CHECK(rig.call("DELETE", "/api/v1/mode").status == 405);
  CHECK(rig.call("GET", "/api/v1/nothing").status == 404);
}

TEST_CASE("visits") {
  Rig rig;
  CHECK(rig.call("GET", "/api/v1/visits", {{"user", "ann"}}).status == 404);
  CHECK(rig.call("POST", "/api/v1/visits", {{"user", "ann"}}).status == 409);
  rig.connect();
  rig.core.on_line(rig.h, "SENSOR 1 0 T=29.5 M=320 L=5100");
  rig.clock.set(60000);
  CHECK(rig.call("POST", "/api/v1/visits", {{"user", "ann"}}).status == 201);
  auto j = json::parse(rig.call("GET", "/api/v1/visits", {{"user", "ann"}}).body);
  CHECK(j["last_visit_ts_ms"] == 60000);
  CHECK(j["snapshot_at_visit"]["temp_c"] == 29.5);
  CHECK(j["snapshot_at_visit"]["moisture_adc"] == 320);
  CHECK(rig.call("GET", "/api/v1/visits", {{"user", "a,b"}}).status == 400);
  CHECK(rig.call("GET", "/api/v1/visits").status == 400);
}

TEST_CASE("ttest endpoint") {
  Rig rig;
  auto r = rig.call("POST", "/api/v1/stats/ttest", {{"test_value", "24.688"}, {"day", "Day 29"}}, heights_csv());
  REQUIRE(r.status == 200);
  auto j = json::parse(r.body);
  CHECK(j["df"] == 10);
  CHECK(j["t"].get<double>() == doctest::Approx(0.709).epsilon(1e-3));
  CHECK(j["p_two_tailed"].get<double>() == doctest::Approx(0.495).epsilon(2e-3));
  CHECK(j["day"] == "Day 29 6-Feb");
  // Default day is the last column.
  CHECK(rig.call("POST", "/api/v1/stats/ttest", {{"test_value", "24.688"}}, heights_csv()).body == r.body);
  CHECK(rig.call("POST", "/api/v1/stats/ttest", {}, heights_csv()).status == 400);
  CHECK(rig.call("POST", "/api/v1/stats/ttest", {{"test_value", "1"}}, "garbage").status == 400);
  CHECK(rig.call("POST", "/api/v1/stats/ttest", {{"test_value", "1"}}, "sample,Day 1\n1,2.0\n").status == 422);
  CHECK(rig.call("POST", "/api/v1/stats/ttest", {{"test_value", "1"}}, "sample,Day 1\n1,2.0\n2,2.0\n").status == 422);
}

}
