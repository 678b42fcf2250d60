#include "microfarm/http_server.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "microfarm/api.hpp"

namespace microfarm::api {

namespace {

constexpr auto kStreamPoll = std::chrono::milliseconds(200);
// Comment frames keep idle streams alive and surface dead clients.
constexpr int kKeepAlivePolls = 50;

Request to_request(const httplib::Request& req) {
  Request r{req.method, req.path, {}, req.body};
  for (const auto& [k, v] : req.params) r.query.emplace(k, v);
  return r;
}

}  // namespace

struct HttpServer::Impl {
  Impl(gateway::GatewayCore& c) : core(c), router(c) {}

  gateway::GatewayCore& core;
  Router router;
  httplib::Server server;
  int port = 0;
  std::atomic<bool> stopping{false};
  std::thread thread;
};

HttpServer::HttpServer(gateway::GatewayCore& core, const Endpoint& ep, const std::string& ui_dir)
    : impl_(std::make_unique<Impl>(core)) {
  auto& svr = impl_->server;
  Impl* self = impl_.get();
  // The library default adds SO_REUSEPORT, which would let a second
  // instance bind the same port without error.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  svr.Get("/api/v1/stream", [self](const httplib::Request&, httplib::Response& res) {
    auto sub = self->core.bus().subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [self, sub, idle = 0](std::size_t, httplib::DataSink& sink) mutable {
          while (!self->stopping.load() && !sub->cancelled()) {
            if (auto e = sub->next(kStreamPoll)) {
              auto text = format_sse(*e);
              return sink.write(text.data(), text.size());
            }
            if (++idle >= kKeepAlivePolls) {
              idle = 0;
              static const std::string ping = ": ping\n\n";
              return sink.write(ping.data(), ping.size());
            }
            if (!sink.is_writable()) return false;
          }
          sink.done();
          return true;
        },
        [sub](bool) { sub->cancel(); });
  });

  auto route = [self](const httplib::Request& req, httplib::Response& res) {
    auto out = self->router.handle(to_request(req));
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  svr.Get("/api/v1/.*", route);
  svr.Post("/api/v1/.*", route);
  svr.Put("/api/v1/.*", route);
  svr.Delete("/api/v1/.*", route);

  if (!ui_dir.empty() && !svr.set_mount_point("/", ui_dir)) {
    throw std::runtime_error("ui directory not found: " + ui_dir);
  }

  if (ep.port == 0) {
    impl_->port = svr.bind_to_any_port(ep.host);
    if (impl_->port <= 0) throw std::runtime_error("cannot bind HTTP listener on " + ep.host);
  } else {
    if (!svr.bind_to_port(ep.host, ep.port)) {
      throw std::runtime_error("cannot bind HTTP listener on " + to_string(ep) + " (address in use?)");
    }
    impl_->port = ep.port;
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::port() const { return impl_->port; }

void HttpServer::start() {
  impl_->thread = std::thread([self = impl_.get()] { self->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace microfarm::api
