#include "microfarm/clock.hpp"

#include <stdexcept>

namespace microfarm {

ScaledClock::ScaledClock(double scale, TimeMs origin)
    : scale_(scale), origin_(origin), start_(std::chrono::steady_clock::now()) {
  if (!(scale > 0.0)) throw std::invalid_argument("time scale must be positive");
}

TimeMs ScaledClock::now_ms() const {
  auto elapsed = std::chrono::steady_clock::now() - start_;
  double wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  return origin_ + static_cast<TimeMs>(wall_ms * scale_);
}

std::chrono::steady_clock::time_point ScaledClock::wall_at(TimeMs t) const {
  double wall_ms = static_cast<double>(t - origin_) / scale_;
  return start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double, std::milli>(wall_ms));
}

}  // namespace microfarm
