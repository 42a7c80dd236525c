#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ampeq/error.hpp"
#include "ampeq/stats.hpp"

using namespace ampeq;

TEST_CASE("moments and quantiles") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(xs) == 2.5);
  CHECK(stats::variance(xs) == doctest::Approx(5.0 / 3.0));
  CHECK(stats::quantile(xs, 0.5) == 2.5);
  CHECK(stats::quantile(xs, 0.0) == 1.0);
  CHECK(stats::quantile(xs, 1.0) == 4.0);
  CHECK_THROWS_AS(stats::mean({}), Error);
}

TEST_CASE("ols recovers an exact line") {
  const auto fit = stats::ols({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.slope_se == doctest::Approx(0.0));
}

TEST_CASE("bootstrap slope of a power law") {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> noise(0.0, 0.2);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  std::vector<std::vector<double>> samples;
  for (const double e : eps) {
    std::vector<double> s;
    for (int i = 0; i < 500; ++i) s.push_back(e * e * noise(rng));
    samples.push_back(s);
  }
  const auto b = stats::bootstrap_log_slope(eps, samples, 300, 11);
  CHECK(b.slope == doctest::Approx(2.0).epsilon(0.02));
  CHECK(b.se > 0.0);
  CHECK(b.se < 0.05);
  const auto again = stats::bootstrap_log_slope(eps, samples, 300, 11);
  CHECK(again.se == b.se);
}

TEST_CASE("ks statistic") {
  CHECK(stats::ks_statistic({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(stats::ks_statistic({1.0, 2.0}, {3.0, 4.0}) == 1.0);
  CHECK(stats::ks_statistic({1.0, 3.0}, {2.0, 4.0}) == doctest::Approx(0.5));
}

TEST_CASE("wilson interval") {
  const auto w = stats::wilson(0, 200);
  CHECK(w.estimate == 0.0);
  CHECK(w.lower == 0.0);
  CHECK(w.upper == doctest::Approx(0.0188).epsilon(0.01));
  const auto h = stats::wilson(50, 100);
  CHECK(h.lower == doctest::Approx(0.4038).epsilon(0.001));
  CHECK(h.upper == doctest::Approx(0.5962).epsilon(0.001));
}
