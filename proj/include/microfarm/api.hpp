#ifndef MICROFARM_API_HPP
#define MICROFARM_API_HPP

#include <map>
#include <string>

#include "microfarm/gateway.hpp"
#include "microfarm/stats.hpp"

namespace microfarm::api {

struct Request {
  std::string method;  // "GET", "POST", "PUT"
  std::string path;    // without query string
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// HTTP API routes under /api/v1, independent of the HTTP server so they can
// be exercised directly. The event stream is served by HttpServer.
//
// Routes only touch the datastore and the gateway core; nothing here reaches
// a node connection directly.
class Router {
 public:
  explicit Router(gateway::GatewayCore& core) : core_(core) {}

  Response handle(const Request& req);

 private:
  Response snapshot();
  Response history(const Request& req);
  Response actuators();
  Response put_mode(const Request& req);
  Response post_actuator(const Request& req, Actuator target);
  Response get_visit(const Request& req);
  Response post_visit(const Request& req);
  Response ttest(const Request& req);

  gateway::GatewayCore& core_;
};

// Body of a successful POST /api/v1/stats/ttest (also used by the CLI).
std::string ttest_json(const std::string& day_label, const stats::TTestResult& r);

}  // namespace microfarm::api

#endif  // MICROFARM_API_HPP
