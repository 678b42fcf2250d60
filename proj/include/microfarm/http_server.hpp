#ifndef MICROFARM_HTTP_SERVER_HPP
#define MICROFARM_HTTP_SERVER_HPP

#include <memory>
#include <string>

#include "microfarm/gateway.hpp"
#include "microfarm/tcp.hpp"

namespace microfarm::api {

// Serves the Router under /api/v1, the event stream at /api/v1/stream and,
// when ui_dir is set, static files under /. Binds in the constructor
// (throws std::runtime_error when the address is taken); start() spawns the
// serving thread.
class HttpServer {
 public:
  HttpServer(gateway::GatewayCore& core, const Endpoint& ep, const std::string& ui_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const;
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace microfarm::api

#endif  // MICROFARM_HTTP_SERVER_HPP
