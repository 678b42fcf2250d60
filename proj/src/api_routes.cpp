#include <charconv>
#include <cmath>

#include "json.hpp"
#include "microfarm/api.hpp"
#include "microfarm/heights.hpp"

namespace microfarm::api {

using nlohmann::json;

namespace {

constexpr std::string_view kPrefix = "/api/v1/";

Response json_response(int status, const json& body) { return Response{status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message) { return json_response(status, json{{"error", message}}); }

json flags_json(const ActuatorFlags& f) {
  return json{{"pump", f.pump}, {"cooler", f.cooler}, {"light", f.light}};
}

json snapshot_values_json(const SnapshotValues& v) {
  return json{{"temp_c", v.temp_c}, {"moisture_adc", v.moisture_adc}, {"lux", v.lux}};
}

std::optional<std::string> query(const Request& req, const std::string& key) {
  auto it = req.query.find(key);
  if (it == req.query.end()) return std::nullopt;
  return it->second;
}

std::optional<json> parse_body(const Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

std::string ttest_json(const std::string& day_label, const stats::TTestResult& r) {
  return json{{"day", day_label},
              {"n", r.n},
              {"mean", r.mean},
              {"sd", r.sd},
              {"se", r.se},
              {"test_value", r.test_value},
              {"mean_diff", r.mean_diff},
              {"t", r.t},
              {"df", r.df},
              {"p_two_tailed", r.p_two_tailed},
              {"ci_low", r.ci_low},
              {"ci_high", r.ci_high}}
      .dump();
}

Response Router::handle(const Request& req) {
  if (req.path.rfind(kPrefix, 0) != 0) return error(404, "not found");
  const std::string route = req.path.substr(kPrefix.size());
  auto only = [&](const char* method) { return req.method == method; };

  try {
    if (route == "snapshot") return only("GET") ? snapshot() : error(405, "method not allowed");
    if (route == "history") return only("GET") ? history(req) : error(405, "method not allowed");
    if (route == "actuators") return only("GET") ? actuators() : error(405, "method not allowed");
    if (route == "mode") return only("PUT") ? put_mode(req) : error(405, "method not allowed");
    if (route.rfind("actuators/", 0) == 0) {
      auto target = parse_path_name(std::string_view(route).substr(10));
      if (!target) return error(404, "unknown actuator");
      return only("POST") ? post_actuator(req, *target) : error(405, "method not allowed");
    }
    if (route == "visits") {
      if (only("GET")) return get_visit(req);
      if (only("POST")) return post_visit(req);
      return error(405, "method not allowed");
    }
    if (route == "stats/ttest") return only("POST") ? ttest(req) : error(405, "method not allowed");
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
  return error(404, "not found");
}

Response Router::snapshot() {
  auto snap = core_.snapshot();
  json j;
  if (snap.reading) {
    j["temp_c"] = snap.reading->temp_c;
    j["moisture_adc"] = snap.reading->moisture_adc;
    j["lux"] = snap.reading->lux;
    j["reading_ts_ms"] = snap.reading->timestamp_ms;
  } else {
    j["temp_c"] = nullptr;
    j["moisture_adc"] = nullptr;
    j["lux"] = nullptr;
    j["reading_ts_ms"] = nullptr;
  }
  j["actuators"] = flags_json(snap.actuators);
  j["mode"] = to_string(snap.mode.mode);
  j["stale"] = snap.stale;
  j["now_ms"] = core_.clock().now_ms();
  return json_response(200, j);
}

Response Router::history(const Request& req) {
  auto p = query(req, "param");
  if (!p) return error(400, "missing param");
  auto param = parse_param(*p);
  if (!param) return error(400, "unknown param '" + *p + "'");
  auto w = query(req, "window_s");
  auto window = w ? parse_int(*w) : std::optional<std::int64_t>(14400);
  if (!window || *window <= 0) return error(400, "window_s must be a positive integer");
  json arr = json::array();
  for (const auto& pt : core_.store().query_window(*param, core_.clock().now_ms(), *window)) {
    arr.push_back(json{{"ts_ms", pt.ts_ms}, {"value", pt.value}});
  }
  return json_response(200, arr);
}

Response Router::actuators() {
  auto flags = core_.reported_flags();
  json j = flags_json(flags);
  j["mode"] = to_string(core_.mode().mode);
  return json_response(200, j);
}

Response Router::put_mode(const Request& req) {
  auto body = parse_body(req);
  if (!body || !body->contains("mode") || !(*body)["mode"].is_string()) {
    return error(400, "body must be {\"mode\": \"AUTO\"|\"MANUAL\"}");
  }
  auto mode = parse_mode((*body)["mode"].get<std::string>());
  if (!mode) return error(400, "unknown mode");
  std::string by = "api";
  if (body->contains("user") && (*body)["user"].is_string()) by = (*body)["user"].get<std::string>();
  if (!store::valid_label(by)) return error(400, "bad user name");
  auto res = core_.set_mode(*mode, by);
  return json_response(200, json{{"mode", to_string(res.mode.mode)},
                                 {"changed_at_ms", res.mode.changed_at_ms},
                                 {"changed_by", res.mode.changed_by},
                                 {"changed", res.changed}});
}

Response Router::post_actuator(const Request& req, Actuator target) {
  auto body = parse_body(req);
  if (!body || !body->contains("action") || !(*body)["action"].is_string()) {
    return error(400, "body must be {\"action\": \"ON\"|\"OFF\"}");
  }
  auto action = parse_action((*body)["action"].get<std::string>());
  if (!action) return error(400, "unknown action");
  auto out = core_.manual_command(target, *action);
  switch (out.status) {
    case gateway::ManualStatus::Conflict: return error(409, out.reason);
    case gateway::ManualStatus::NotConnected: return error(503, "sensor node not connected");
    case gateway::ManualStatus::Unchanged:
      return json_response(202, json{{"result", "unchanged"}, {"actuator", to_string(target)},
                                     {"action", to_string(*action)}});
    case gateway::ManualStatus::Accepted:
      return json_response(202, json{{"result", "accepted"}, {"cmd_id", out.ticket->cmd_id()},
                                     {"actuator", to_string(target)}, {"action", to_string(*action)}});
  }
  return error(500, "unreachable");
}

Response Router::get_visit(const Request& req) {
  auto user = query(req, "user");
  if (!user || !store::valid_label(*user)) return error(400, "missing or bad user");
  auto v = core_.store().last_visit(*user);
  if (!v) return error(404, "first visit");
  return json_response(200, json{{"user", v->user},
                                 {"last_visit_ts_ms", v->ts_ms},
                                 {"snapshot_at_visit", snapshot_values_json(v->snapshot)}});
}

Response Router::post_visit(const Request& req) {
  auto user = query(req, "user");
  if (!user || !store::valid_label(*user)) return error(400, "missing or bad user");
  auto latest = core_.store().latest_reading();
  if (!latest) return error(409, "no reading recorded yet");
  store::VisitRecord v{*user, core_.clock().now_ms(),
                       SnapshotValues{latest->temp_c, latest->moisture_adc, latest->lux}};
  core_.store().record_visit(v);
  return json_response(201, json{{"user", v.user},
                                 {"last_visit_ts_ms", v.ts_ms},
                                 {"snapshot_at_visit", snapshot_values_json(v.snapshot)}});
}

Response Router::ttest(const Request& req) {
  auto tv_text = query(req, "test_value");
  if (!tv_text) return error(400, "missing test_value");
  auto tv = parse_double(*tv_text);
  if (!tv) return error(400, "bad test_value");
  stats::HeightTable table;
  try {
    table = stats::parse_height_csv(req.body);
  } catch (const stats::HeightParseError& e) {
    return error(400, std::string("bad CSV: ") + e.what());
  }
  std::size_t day = table.day_count() - 1;
  if (auto d = query(req, "day")) {
    auto found = table.find_day(*d);
    if (!found) return error(400, "unknown day '" + *d + "'");
    day = *found;
  }
  try {
    auto col = table.column(day);
    auto r = stats::one_sample_ttest(col, *tv);
    return Response{200, ttest_json(table.day_labels[day], r), "application/json"};
  } catch (const stats::StatsError& e) {
    return error(422, e.what());
  }
}

}  // namespace microfarm::api
