#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "microfarm/heights.hpp"
#include "microfarm/stats.hpp"
#include "oracles.hpp"

using namespace microfarm::stats;

namespace {

// Day 29 column of the shipped height table.
const std::vector<double> kDay29{25.1, 26.7, 24.9, 24.4, 23.9, 24.5, 25.1, 26.3, 22.8, 24.8, 25.6};

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("one-sample t-test reproduces the published table") {
  auto r = one_sample_ttest(kDay29, 24.688);
  CHECK(r.n == 11);
  CHECK(std::fabs(r.mean - 24.9182) <= 1e-4);
  CHECK(std::fabs(r.sd - 1.07686) <= 1e-4);
  CHECK(std::fabs(r.se - 0.32469) <= 1e-4);
  CHECK(std::fabs(r.mean_diff - 0.23018) <= 1e-4);
  CHECK(std::fabs(r.t - 0.709) <= 1e-3);
  CHECK(r.df == 10);
  CHECK(std::fabs(r.p_two_tailed - 0.495) <= 1e-3);
  CHECK(std::fabs(r.ci_low - -0.4933) <= 1e-3);
  CHECK(std::fabs(r.ci_high - 0.9536) <= 1e-3);
}

TEST_CASE("t-test internals agree with a long-double oracle") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(24.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> xs(2 + i % 40);
    for (auto& x : xs) x = d(rng);
    auto m = oracle::moments(xs);
    auto r = one_sample_ttest(xs, 24.0);
    CHECK(r.mean == doctest::Approx(static_cast<double>(m.mean)).epsilon(1e-13));
    CHECK(r.sd == doctest::Approx(static_cast<double>(m.sd)).epsilon(1e-11));
    const double t = static_cast<double>((m.mean - 24.0) / (m.sd / std::sqrt(static_cast<long double>(xs.size()))));
    CHECK(r.t == doctest::Approx(t).epsilon(1e-9));
    CHECK(r.p_two_tailed == doctest::Approx(2 * (1 - oracle::t_cdf_quadrature(std::fabs(t), r.df))).epsilon(1e-6));
  }
}

TEST_CASE("test value equal to the mean gives t = 0") {
  auto s = summary(kDay29);
  auto r = one_sample_ttest(kDay29, s.mean);
  CHECK(std::fabs(r.t) < 1e-12);
  CHECK(r.p_two_tailed == doctest::Approx(1.0));
}

TEST_CASE("degenerate and tiny samples") {
  std::vector<double> one{1.0};
  std::vector<double> flat{2.0, 2.0, 2.0};
  try {
    one_sample_ttest(one, 0);
    FAIL("expected error");
  } catch (const StatsError& e) {
    CHECK(e.kind() == StatsError::Kind::InsufficientData);
  }
  try {
    one_sample_ttest(flat, 0);
    FAIL("expected error");
  } catch (const StatsError& e) {
    CHECK(e.kind() == StatsError::Kind::DegenerateSample);
  }
  CHECK_THROWS_AS(summary(std::vector<double>{}), StatsError);
  auto s = summary(one);
  CHECK(s.mean == 1.0);
  CHECK_FALSE(s.sd);
}

TEST_CASE("CDF against quadrature, t in [-5, 5], df 1..30") {
  double worst = 0;
  for (int df = 1; df <= 30; ++df) {
    for (int i = 0; i <= 100; ++i) {
      const double t = -5.0 + 0.1 * i;
      worst = std::max(worst, std::fabs(student_t_cdf(t, df) - oracle::t_cdf_quadrature(t, df)));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("CDF shape") {
  CHECK(student_t_cdf(0.0, 7) == 0.5);
  CHECK(student_t_cdf(1.0, 1) == doctest::Approx(0.75));
  for (double t : {-3.0, -0.5, 0.2, 2.0}) {
    CHECK(student_t_cdf(t, 4) + student_t_cdf(-t, 4) == doctest::Approx(1.0));
    CHECK(student_t_two_tailed_p(t, 4) == doctest::Approx(2 * student_t_cdf(-std::fabs(t), 4)));
  }
  CHECK(student_t_cdf(2.0, 1e6) == doctest::Approx(0.97724986805).epsilon(1e-6));
}

TEST_CASE("quantile inverts the CDF") {
  CHECK(student_t_quantile(0.975, 10) == doctest::Approx(2.228138852).epsilon(1e-8));
  for (int df : {1, 3, 10, 30}) {
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999}) {
      CHECK(student_t_cdf(student_t_quantile(p, df), df) == doctest::Approx(p).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(student_t_quantile(0.0, 3), StatsError);
}

TEST_CASE("incomplete beta special values") {
  CHECK(regularized_incomplete_beta(2, 3, 0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1) == 1.0);
  CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3));
  CHECK(regularized_incomplete_beta(2, 2, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(regularized_incomplete_beta(-1, 1, 0.5), StatsError);
}

TEST_CASE("percentage difference") {
  CHECK(*pct_diff(200, 250) == doctest::Approx(25.0));
  CHECK(*pct_diff(30.0, 27.0) == doctest::Approx(-10.0));
  CHECK_FALSE(pct_diff(0, 5));
}

}
