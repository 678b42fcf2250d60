#include "microfarm/tcp.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "microfarm/protocol.hpp"

namespace microfarm {

namespace {

constexpr std::size_t kMaxBuffered = 4 * proto::kMaxLineBytes;

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(ep.port));
  if (ep.host.empty() || ep.host == "0.0.0.0" || ep.host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw std::invalid_argument("cannot resolve host '" + ep.host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("expected host:port, got '" + text + "'");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    ep.port = std::stoi(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in '" + text + "'");
  }
  if (ep.port < 0 || ep.port > 65535) throw std::invalid_argument("port out of range in '" + text + "'");
  return ep;
}

std::string to_string(const Endpoint& ep) { return ep.host + ":" + std::to_string(ep.port); }

TcpLink::TcpLink(int fd) : fd_(fd) {
  int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  timeval tv{2, 0};
  setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

TcpLink::~TcpLink() {
  close();
  ::close(fd_);
}

bool TcpLink::send(std::string_view line) {
  if (!open_) return false;
  std::string framed(line);
  framed += '\n';
  std::lock_guard lk(send_mu_);
  std::size_t off = 0;
  while (off < framed.size()) {
    ssize_t n = ::send(fd_, framed.data() + off, framed.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      open_ = false;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> TcpLink::pop_line() {
  for (;;) {
    auto nl = buf_.find('\n');
    if (nl == std::string::npos) {
      if (buf_.size() > kMaxBuffered) {
        // Overlong: hand back a prefix (the parser rejects it) and drop the
        // rest of this line.
        std::string head = buf_.substr(0, kMaxBuffered);
        buf_.clear();
        bool was_discarding = discarding_;
        discarding_ = true;
        if (!was_discarding) return head;
      }
      return std::nullopt;
    }
    std::string line = buf_.substr(0, nl);
    buf_.erase(0, nl + 1);
    if (discarding_) {
      discarding_ = false;
      continue;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
}

bool TcpLink::fill(int timeout_ms) {
  if (!open_) return false;
  pollfd p{fd_, POLLIN, 0};
  int r = ::poll(&p, 1, timeout_ms);
  if (r <= 0) return false;
  char chunk[2048];
  ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
  if (n <= 0) {
    if (n < 0 && (errno == EINTR || errno == EAGAIN)) return false;
    open_ = false;
    return false;
  }
  buf_.append(chunk, static_cast<std::size_t>(n));
  return true;
}

std::optional<std::string> TcpLink::try_receive() {
  if (auto l = pop_line()) return l;
  while (fill(0)) {
    if (auto l = pop_line()) return l;
  }
  return std::nullopt;
}

std::optional<std::string> TcpLink::receive_for(std::chrono::milliseconds timeout) {
  if (auto l = pop_line()) return l;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() < 0 || !open_) return std::nullopt;
    if (fill(static_cast<int>(left.count()))) {
      if (auto l = pop_line()) return l;
    } else if (!open_) {
      return std::nullopt;
    } else if (left.count() == 0) {
      return std::nullopt;
    }
  }
}

void TcpLink::close() {
  if (open_.exchange(false)) ::shutdown(fd_, SHUT_RDWR);
}

std::unique_ptr<TcpLink> connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout) {
  sockaddr_in addr{};
  try {
    addr = resolve(ep);
  } catch (const std::exception&) {
    return nullptr;
  }
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) return nullptr;
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int r = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  if (r < 0 && errno != EINPROGRESS) {
    ::close(fd);
    return nullptr;
  }
  if (r < 0) {
    pollfd p{fd, POLLOUT, 0};
    int err = 0;
    socklen_t len = sizeof err;
    if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0 ||
        getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) < 0 || err != 0) {
      ::close(fd);
      return nullptr;
    }
  }
  fcntl(fd, F_SETFL, flags);
  return std::make_unique<TcpLink>(fd);
}

TcpListener::TcpListener(const Endpoint& ep) {
  sockaddr_in addr = resolve(ep);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    std::string msg = "cannot bind " + to_string(ep) + ": " + std::strerror(errno);
    ::close(fd_);
    throw std::runtime_error(msg);
  }
  if (::listen(fd_, 16) < 0) {
    std::string msg = "listen: " + std::string(std::strerror(errno));
    ::close(fd_);
    throw std::runtime_error(msg);
  }
  socklen_t len = sizeof addr;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  stop();
  if (fd_ >= 0) ::close(fd_);
}

void TcpListener::start(AcceptFn on_accept) {
  running_ = true;
  thread_ = std::thread([this, fn = std::move(on_accept)] {
    while (running_) {
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, 100) <= 0) continue;
      int c = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
      if (c < 0) continue;
      fn(std::make_unique<TcpLink>(c));
    }
  });
}

void TcpListener::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

}  // namespace microfarm
