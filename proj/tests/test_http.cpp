#include <atomic>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "microfarm/stack.hpp"
#include "microfarm/tcp.hpp"
#include "test_util.hpp"

using namespace microfarm;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

Config stack_config(const testutil::TempDir& dir, double scale = 600) {
  Config c;
  c.store.dir = dir.path();
  c.node_listen = {"127.0.0.1", 0};
  c.api_listen = {"127.0.0.1", 0};
  c.time_scale = scale;
  return c;
}

template <typename Pred>
bool eventually(Pred p, std::chrono::milliseconds limit = 10s) {
  auto end = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < end) {
    if (p()) return true;
    std::this_thread::sleep_for(20ms);
  }
  return p();
}

struct SseFrame {
  std::string kind;
  json data;
};

// Splits an event-stream body into frames; comment frames are skipped.
std::vector<SseFrame> parse_sse(const std::string& body) {
  std::vector<SseFrame> out;
  std::size_t pos = 0;
  while (true) {
    auto end = body.find("\n\n", pos);
    if (end == std::string::npos) break;
    std::string block = body.substr(pos, end - pos);
    pos = end + 2;
    if (block.rfind(":", 0) == 0) continue;
    auto nl = block.find('\n');
    REQUIRE(nl != std::string::npos);
    REQUIRE(block.rfind("event: ", 0) == 0);
    REQUIRE(block.compare(nl + 1, 6, "data: ") == 0);
    out.push_back({block.substr(7, nl - 7), json::parse(block.substr(nl + 7))});
  }
  return out;
}

}  // namespace

TEST_SUITE("http") {

TEST_CASE("API is up with no node session; node port rejects HTTP") {
  testutil::TempDir dir;
  Stack stack(stack_config(dir), StackOptions{true, false, {}});
  stack.start();
  httplib::Client cli("127.0.0.1", stack.api_port());
  auto r = cli.Get("/api/v1/snapshot");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["stale"] == true);
  CHECK(stack.node_port() != stack.api_port());

  auto link = connect_tcp(Endpoint{"127.0.0.1", stack.node_port()}, 1s);
  REQUIRE(link);
  link->send("GET /api/v1/snapshot HTTP/1.1");
  auto reply = link->receive_for(2s);
  REQUIRE(reply);
  CHECK(reply->rfind("ERR ", 0) == 0);
  CHECK(eventually([&] { return !link->receive_for(50ms) && !link->is_open(); }, 2s));
  stack.stop();
}

TEST_CASE("readings flow to snapshot and history over HTTP") {
  testutil::TempDir dir;
  Stack stack(stack_config(dir), StackOptions{});
  stack.start();
  httplib::Client cli("127.0.0.1", stack.api_port());
  REQUIRE(eventually([&] {
    auto r = cli.Get("/api/v1/snapshot");
    return r && !json::parse(r->body)["temp_c"].is_null();
  }));
  auto h = cli.Get("/api/v1/history?param=temp&window_s=14400");
  REQUIRE(h);
  CHECK(h->status == 200);
  auto arr = json::parse(h->body);
  CHECK(arr.is_array());
  CHECK(arr.size() >= 1);
  CHECK(cli.Get("/api/v1/history?param=wind")->status == 400);
  stack.stop();
}

TEST_CASE("event stream framing and manual override over HTTP") {
  testutil::TempDir dir;
  auto cfg = stack_config(dir, 120);
  cfg.initial_mode = Mode::Manual;
  Stack stack(cfg, StackOptions{});
  stack.start();
  httplib::Client cli("127.0.0.1", stack.api_port());
  REQUIRE(eventually([&] { return stack.core()->node_connected("node-1"); }));

  std::string body;
  std::mutex mu;
  std::atomic<bool> stop{false};
  std::thread reader([&] {
    httplib::Client sc("127.0.0.1", stack.api_port());
    sc.set_read_timeout(5s);
    sc.Get("/api/v1/stream", [&](const char* data, std::size_t n) {
      std::lock_guard lk(mu);
      body.append(data, n);
      return !stop.load();
    });
  });
  REQUIRE(eventually([&] {
    std::lock_guard lk(mu);
    return body.find("event: reading") != std::string::npos;
  }));

  auto r = cli.Post("/api/v1/actuators/light", R"({"action":"ON"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 202);
  REQUIRE(eventually([&] {
    std::lock_guard lk(mu);
    return body.find("event: actuation") != std::string::npos;
  }));
  r = cli.Put("/api/v1/mode", R"({"mode":"AUTO"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(cli.Post("/api/v1/actuators/light", R"({"action":"OFF"})", "application/json")->status == 409);
  REQUIRE(eventually([&] {
    std::lock_guard lk(mu);
    return body.find("event: mode") != std::string::npos;
  }));
  stop = true;
  stack.stop();
  reader.join();

  auto frames = parse_sse(body);
  bool saw_manual_light = false;
  for (const auto& f : frames) {
    CHECK((f.kind == "reading" || f.kind == "actuation" || f.kind == "mode"));
    if (f.kind == "reading") CHECK(f.data.contains("seq"));
    if (f.kind == "actuation" && f.data["actuator"] == "LIGHT" && f.data["source"] == "MANUAL") saw_manual_light = true;
  }
  CHECK(saw_manual_light);
  CHECK(cli.Get("/api/v1/actuators") == nullptr);
}

TEST_CASE("a taken port is a startup error") {
  testutil::TempDir dir;
  Stack first(stack_config(dir), StackOptions{true, false, {}});
  auto cfg = stack_config(dir);
  cfg.api_listen.port = first.api_port();
  testutil::TempDir dir2;
  cfg.store.dir = dir2.path();
  CHECK_THROWS_AS(Stack(cfg, StackOptions{true, false, {}}), std::runtime_error);
}

TEST_CASE("static UI files are served from net.ui_dir") {
  testutil::TempDir dir;
  testutil::TempDir ui;
  {
    std::ofstream(ui.path() / "index.html") << "<html>farm</html>";
  }
  auto cfg = stack_config(dir);
  cfg.ui_dir = ui.path().string();
  Stack stack(cfg, StackOptions{true, false, {}});
  stack.start();
  httplib::Client cli("127.0.0.1", stack.api_port());
  auto r = cli.Get("/index.html");
  REQUIRE(r);
  CHECK(r->body == "<html>farm</html>");
  stack.stop();
}

}
