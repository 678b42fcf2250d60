#ifndef MICROFARM_CLOCK_HPP
#define MICROFARM_CLOCK_HPP

#include <atomic>
#include <chrono>

#include "microfarm/types.hpp"

namespace microfarm {

// Source of virtual time. Implementations are safe to read from any thread.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimeMs now_ms() const = 0;
};

// Test clock: time moves only when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(TimeMs start = 0) : now_(start) {}
  TimeMs now_ms() const override { return now_.load(); }
  void set(TimeMs t) { now_.store(t); }
  void advance(TimeMs dt) { now_.fetch_add(dt); }

 private:
  std::atomic<TimeMs> now_;
};

// Virtual time = origin + (wall elapsed) * scale. A scale of 60 replays one
// virtual hour per wall minute.
class ScaledClock final : public Clock {
 public:
  explicit ScaledClock(double scale, TimeMs origin = 0);
  TimeMs now_ms() const override;
  double scale() const { return scale_; }

  // Wall instant at which the virtual clock reads `t`.
  std::chrono::steady_clock::time_point wall_at(TimeMs t) const;

 private:
  double scale_;
  TimeMs origin_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace microfarm

#endif  // MICROFARM_CLOCK_HPP
