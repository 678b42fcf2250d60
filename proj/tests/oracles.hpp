// Independent reference implementations the production code is checked
// against. Deliberately naive: no shared code with src/.
#ifndef MICROFARM_TESTS_ORACLES_HPP
#define MICROFARM_TESTS_ORACLES_HPP

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "microfarm/control.hpp"
#include "microfarm/types.hpp"

namespace oracle {

// Student-t density, long double.
inline long double t_density(long double x, long double df) {
  const long double lognorm = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                              0.5L * std::log(df * std::numbers::pi_v<long double>);
  return std::exp(lognorm - (df + 1) / 2 * std::log1p(x * x / df));
}

// CDF by composite Simpson on [0, |t|] around the symmetric midpoint 0.5.
inline double t_cdf_quadrature(double t, double df, int intervals = 4000) {
  const long double a = std::fabs(static_cast<long double>(t));
  if (a == 0) return 0.5;
  const long double h = a / intervals;
  long double sum = t_density(0, df) + t_density(a, df);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4 : 2) * t_density(i * h, df);
  const long double half = sum * h / 3;
  return static_cast<double>(t > 0 ? 0.5L + half : 0.5L - half);
}

struct Moments {
  long double mean = 0;
  long double sd = 0;
};

inline Moments moments(const std::vector<double>& xs) {
  long double s = 0;
  for (double x : xs) s += x;
  Moments m;
  m.mean = s / xs.size();
  long double ss = 0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(ss / (xs.size() - 1));
  return m;
}

// Regulator state after reading k, recomputed from scratch: the newest
// reading at or before k that lies outside the hysteresis band decides it;
// with none, the regulator is still off.
inline bool brute_force_on(const std::vector<microfarm::SensorReading>& rs, std::size_t k,
                           microfarm::Param p, const microfarm::control::Thresholds& th) {
  for (std::size_t j = k + 1; j-- > 0;) {
    const double v = rs[j].value(p);
    switch (p) {
      case microfarm::Param::Temp:
        if (v > th.temp_max_c) return true;
        if (v <= th.temp_max_c - th.temp_hyst_c) return false;
        break;
      case microfarm::Param::Moisture:
        if (v < th.moisture_min_adc) return true;
        if (v >= th.moisture_min_adc + th.moisture_hyst_adc) return false;
        break;
      case microfarm::Param::Light:
        if (v < th.lux_min) return true;
        if (v >= th.lux_min + th.lux_hyst) return false;
        break;
    }
  }
  return false;
}

// Random walk around the thresholds so every band region gets visited.
inline std::vector<microfarm::SensorReading> random_stream(std::mt19937_64& rng, std::size_t n,
                                                            microfarm::TimeMs cadence = 5000) {
  std::uniform_real_distribution<double> step(-1.0, 1.0);
  std::bernoulli_distribution jump(0.05);
  std::uniform_real_distribution<double> tjump(25.0, 35.0);
  std::uniform_int_distribution<int> mjump(200, 400);
  std::uniform_int_distribution<int> ljump(3000, 7000);
  double t = tjump(rng);
  double m = mjump(rng);
  double l = ljump(rng);
  std::vector<microfarm::SensorReading> out;
  for (std::size_t i = 0; i < n; ++i) {
    t = jump(rng) ? tjump(rng) : std::clamp(t + 0.6 * step(rng), 0.0, 50.0);
    m = jump(rng) ? mjump(rng) : std::clamp(m + 20 * step(rng), 0.0, 1023.0);
    l = jump(rng) ? ljump(rng) : std::clamp(l + 300 * step(rng), 1.0, 65535.0);
    microfarm::SensorReading r;
    r.node_id = "node-1";
    r.seq = static_cast<std::int64_t>(i) + 1;
    r.timestamp_ms = static_cast<microfarm::TimeMs>(i) * cadence;
    r.temp_c = microfarm::round_to_tenth(t);
    r.moisture_adc = static_cast<int>(std::lround(m));
    r.lux = static_cast<int>(std::lround(l));
    out.push_back(r);
  }
  return out;
}

// On/off state of `a` after each reading, reconstructed from an event log.
inline std::vector<bool> trace_from_events(const std::vector<microfarm::SensorReading>& rs,
                                           const std::vector<microfarm::ActuationEvent>& events,
                                           microfarm::Actuator a) {
  std::vector<bool> out;
  bool on = false;
  std::size_t next = 0;
  std::vector<microfarm::ActuationEvent> mine;
  for (const auto& e : events) {
    if (e.actuator == a) mine.push_back(e);
  }
  for (const auto& r : rs) {
    while (next < mine.size() && mine[next].ts_ms <= r.timestamp_ms) {
      on = mine[next++].action == microfarm::Action::On;
    }
    out.push_back(on);
  }
  return out;
}

// Interval membership against a mode log: which mode was active at ts.
// Intervals are half-open [changed_at, next changed_at).
inline std::optional<microfarm::Mode> mode_at(const std::vector<microfarm::ControlMode>& modes,
                                              microfarm::TimeMs ts) {
  std::optional<microfarm::Mode> m;
  for (const auto& c : modes) {
    if (c.changed_at_ms <= ts) m = c.mode;
  }
  return m;
}

}  // namespace oracle

#endif  // MICROFARM_TESTS_ORACLES_HPP
