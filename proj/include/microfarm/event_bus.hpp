#ifndef MICROFARM_EVENT_BUS_HPP
#define MICROFARM_EVENT_BUS_HPP

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace microfarm {

// kind is "reading", "actuation" or "mode"; data is a one-line JSON object.
struct StreamEvent {
  std::string kind;
  std::string data;
};

// Server-sent-events framing: "event: <kind>\ndata: <data>\n\n".
std::string format_sse(const StreamEvent& e);

class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  std::optional<StreamEvent> next(std::chrono::milliseconds timeout);
  void push(StreamEvent e);
  void cancel();
  bool cancelled() const;
  std::size_t dropped() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<StreamEvent> queue_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  bool cancelled_ = false;
};

// Fan-out of live events to stream subscribers. A slow subscriber loses its
// oldest queued events rather than blocking publishers.
class EventBus {
 public:
  explicit EventBus(std::size_t per_subscriber_capacity = 1024) : capacity_(per_subscriber_capacity) {}

  std::shared_ptr<Subscription> subscribe();
  void publish(const StreamEvent& e);
  void shutdown();
  std::size_t subscriber_count();

 private:
  std::mutex mu_;
  std::vector<std::weak_ptr<Subscription>> subs_;
  std::size_t capacity_;
};

}  // namespace microfarm

#endif  // MICROFARM_EVENT_BUS_HPP
