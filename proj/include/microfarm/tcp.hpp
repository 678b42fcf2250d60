#ifndef MICROFARM_TCP_HPP
#define MICROFARM_TCP_HPP

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "microfarm/link.hpp"

namespace microfarm {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};

// Parses "host:port". Throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& text);
std::string to_string(const Endpoint& ep);

// Line framing over a connected TCP socket. send() may be called from any
// thread; receiving is meant for a single reader.
class TcpLink final : public LineLink {
 public:
  explicit TcpLink(int fd);
  ~TcpLink() override;
  TcpLink(const TcpLink&) = delete;
  TcpLink& operator=(const TcpLink&) = delete;

  bool send(std::string_view line) override;
  std::optional<std::string> try_receive() override;
  std::optional<std::string> receive_for(std::chrono::milliseconds timeout) override;
  bool is_open() const override { return open_.load(); }
  void close() override;

 private:
  std::optional<std::string> pop_line();
  bool fill(int timeout_ms);

  int fd_;
  std::atomic<bool> open_{true};
  std::mutex send_mu_;
  std::string buf_;
  bool discarding_ = false;
};

// Outbound connection; nullptr on failure.
std::unique_ptr<TcpLink> connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout);

// Listening socket with an accept thread. Each accepted connection is handed
// to the callback, which takes ownership.
class TcpListener {
 public:
  using AcceptFn = std::function<void(std::unique_ptr<TcpLink>)>;

  // Binds immediately (port 0 picks an ephemeral port). Throws std::runtime_error.
  explicit TcpListener(const Endpoint& ep);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  void start(AcceptFn on_accept);
  void stop();

 private:
  int fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

}  // namespace microfarm

#endif  // MICROFARM_TCP_HPP
