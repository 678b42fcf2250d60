#ifndef MICROFARM_STATS_HPP
#define MICROFARM_STATS_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace microfarm::stats {

class StatsError : public std::domain_error {
 public:
  enum class Kind { InsufficientData, DegenerateSample, BadArgument };
  StatsError(Kind kind, const std::string& what) : std::domain_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // n - 1 denominator; absent for n < 2
  std::optional<double> se;
};

// Throws StatsError(InsufficientData) on an empty sample.
Summary summary(std::span<const double> samples);

struct TTestResult {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  double test_value = 0.0;
  double mean_diff = 0.0;
  double t = 0.0;
  int df = 0;
  double p_two_tailed = 1.0;
  double ci_low = 0.0;   // 95% interval of the difference
  double ci_high = 0.0;
};

// Two-tailed one-sample t-test. Throws StatsError: InsufficientData for
// n < 2, DegenerateSample when every sample is equal.
TTestResult one_sample_ttest(std::span<const double> samples, double test_value,
                             double confidence = 0.95);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1]. Continued
// fraction (modified Lentz) on whichever side of the mean converges fast.
double regularized_incomplete_beta(double a, double b, double x);

// Student-t CDF with `df` degrees of freedom (df > 0, need not be integral).
double student_t_cdf(double t, double df);

// P(|T| >= |t|), computed without the 1 - F cancellation.
double student_t_two_tailed_p(double t, double df);

// Inverse CDF by bisection to 1e-10 in t. p in (0, 1).
double student_t_quantile(double p, double df);

// (current - last) / last * 100; nullopt when last == 0.
std::optional<double> pct_diff(double last_value, double current_value);

}  // namespace microfarm::stats

#endif  // MICROFARM_STATS_HPP
