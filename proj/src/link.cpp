#include "microfarm/link.hpp"

namespace microfarm {

namespace detail {
struct MemoryChannel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> lines;
  bool closed = false;
};
}  // namespace detail

namespace {

void close_channel(detail::MemoryChannel& ch) {
  {
    std::lock_guard lk(ch.mu);
    ch.closed = true;
  }
  ch.cv.notify_all();
}

}  // namespace

MemoryLink::MemoryLink(std::shared_ptr<detail::MemoryChannel> in,
                       std::shared_ptr<detail::MemoryChannel> out)
    : in_(std::move(in)), out_(std::move(out)) {}

MemoryLink::~MemoryLink() { close(); }

bool MemoryLink::send(std::string_view line) {
  {
    std::lock_guard lk(out_->mu);
    if (out_->closed) return false;
    out_->lines.emplace_back(line);
  }
  out_->cv.notify_one();
  return true;
}

std::optional<std::string> MemoryLink::try_receive() {
  std::lock_guard lk(in_->mu);
  if (in_->lines.empty()) return std::nullopt;
  std::string line = std::move(in_->lines.front());
  in_->lines.pop_front();
  return line;
}

std::optional<std::string> MemoryLink::receive_for(std::chrono::milliseconds timeout) {
  std::unique_lock lk(in_->mu);
  in_->cv.wait_for(lk, timeout, [&] { return !in_->lines.empty() || in_->closed; });
  if (in_->lines.empty()) return std::nullopt;
  std::string line = std::move(in_->lines.front());
  in_->lines.pop_front();
  return line;
}

bool MemoryLink::is_open() const {
  std::lock_guard lk(out_->mu);
  return !out_->closed;
}

void MemoryLink::close() {
  close_channel(*out_);
  close_channel(*in_);
}

std::pair<std::unique_ptr<MemoryLink>, std::unique_ptr<MemoryLink>> make_memory_link() {
  auto ab = std::make_shared<detail::MemoryChannel>();
  auto ba = std::make_shared<detail::MemoryChannel>();
  return {std::make_unique<MemoryLink>(ba, ab), std::make_unique<MemoryLink>(ab, ba)};
}

}  // namespace microfarm
