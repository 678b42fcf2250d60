#include "microfarm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace microfarm::stats {

namespace {

// Neumaier-compensated sum.
double accurate_sum(std::span<const double> xs, double shift = 0.0, bool square = false) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    double v = x - shift;
    if (square) v *= v;
    double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError(StatsError::Kind::BadArgument, "incomplete beta continued fraction did not converge");
}

}  // namespace

Summary summary(std::span<const double> samples) {
  if (samples.empty()) throw StatsError(StatsError::Kind::InsufficientData, "empty sample");
  Summary s;
  s.n = samples.size();
  s.mean = accurate_sum(samples) / static_cast<double>(s.n);
  if (s.n >= 2) {
    // Two-pass: sum of squared deviations from the mean, then a correction
    // for the residual error in the mean.
    const double ss = accurate_sum(samples, s.mean, true);
    const double resid = accurate_sum(samples, s.mean);
    const double var = (ss - resid * resid / static_cast<double>(s.n)) / static_cast<double>(s.n - 1);
    s.sd = std::sqrt(std::max(var, 0.0));
    s.se = *s.sd / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw StatsError(StatsError::Kind::BadArgument, "incomplete beta needs a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw StatsError(StatsError::Kind::BadArgument, "incomplete beta needs x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw StatsError(StatsError::Kind::BadArgument, "df must be > 0");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  if (t == 0.0) {
    if (!(df > 0.0)) throw StatsError(StatsError::Kind::BadArgument, "df must be > 0");
    return 0.5;
  }
  const double tail = 0.5 * student_t_two_tailed_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw StatsError(StatsError::Kind::BadArgument, "p must be in (0, 1)");
  if (p == 0.5) return 0.0;
  double lo = -1.0, hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TTestResult one_sample_ttest(std::span<const double> samples, double test_value, double confidence) {
  if (samples.size() < 2) {
    throw StatsError(StatsError::Kind::InsufficientData, "t-test needs at least 2 samples");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw StatsError(StatsError::Kind::BadArgument, "confidence must be in (0, 1)");
  }
  if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples[0]; })) {
    throw StatsError(StatsError::Kind::DegenerateSample, "sample variance is zero");
  }
  const Summary s = summary(samples);
  TTestResult r;
  r.n = s.n;
  r.mean = s.mean;
  r.sd = *s.sd;
  r.se = *s.se;
  r.test_value = test_value;
  r.mean_diff = s.mean - test_value;
  r.t = r.mean_diff / r.se;
  r.df = static_cast<int>(s.n - 1);
  r.p_two_tailed = student_t_two_tailed_p(r.t, r.df);
  const double crit = student_t_quantile(0.5 + confidence / 2.0, r.df);
  r.ci_low = r.mean_diff - crit * r.se;
  r.ci_high = r.mean_diff + crit * r.se;
  return r;
}

std::optional<double> pct_diff(double last_value, double current_value) {
  if (last_value == 0.0) return std::nullopt;
  return (current_value - last_value) / last_value * 100.0;
}

}  // namespace microfarm::stats
