#include "microfarm/event_bus.hpp"

#include <algorithm>

namespace microfarm {

std::string format_sse(const StreamEvent& e) { return "event: " + e.kind + "\ndata: " + e.data + "\n\n"; }

std::optional<StreamEvent> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return !queue_.empty() || cancelled_; });
  if (queue_.empty()) return std::nullopt;
  StreamEvent e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

void Subscription::push(StreamEvent e) {
  {
    std::lock_guard lk(mu_);
    if (cancelled_) return;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(std::move(e));
  }
  cv_.notify_one();
}

void Subscription::cancel() {
  {
    std::lock_guard lk(mu_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

bool Subscription::cancelled() const {
  std::lock_guard lk(mu_);
  return cancelled_;
}

std::size_t Subscription::dropped() const {
  std::lock_guard lk(mu_);
  return dropped_;
}

std::shared_ptr<Subscription> EventBus::subscribe() {
  auto sub = std::make_shared<Subscription>(capacity_);
  std::lock_guard lk(mu_);
  subs_.push_back(sub);
  return sub;
}

void EventBus::publish(const StreamEvent& e) {
  std::vector<std::shared_ptr<Subscription>> live;
  {
    std::lock_guard lk(mu_);
    std::erase_if(subs_, [](const auto& w) { return w.expired(); });
    for (auto& w : subs_) {
      if (auto s = w.lock()) live.push_back(std::move(s));
    }
  }
  for (auto& s : live) s->push(e);
}

void EventBus::shutdown() {
  std::lock_guard lk(mu_);
  for (auto& w : subs_) {
    if (auto s = w.lock()) s->cancel();
  }
  subs_.clear();
}

std::size_t EventBus::subscriber_count() {
  std::lock_guard lk(mu_);
  std::erase_if(subs_, [](const auto& w) { return w.expired(); });
  return subs_.size();
}

}  // namespace microfarm
