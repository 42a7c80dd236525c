#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ampeq::stats {

double mean(const std::vector<double>& xs);
/// Unbiased sample variance; zero for fewer than two samples.
double variance(const std::vector<double>& xs);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> xs, double q);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  ///< classical OLS standard error (0 when n <= 2)
};
LineFit ols(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log(mean error) against log(eps); samples[g] holds per-path errors at eps[g].
/// Standard error from resampling paths within each group.
struct BootstrapSlope {
  double slope = 0.0;
  double se = 0.0;
  std::size_t resamples = 0;
};
BootstrapSlope bootstrap_log_slope(const std::vector<double>& eps, const std::vector<std::vector<double>>& samples,
                                   std::size_t resamples, std::uint64_t seed);

/// sup_x |F_a(x) - F_b(x)| for the empirical CDFs.
double ks_statistic(std::vector<double> a, std::vector<double> b);

struct Interval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
/// Wilson score interval for k successes in n trials.
Interval wilson(std::size_t k, std::size_t n, double z = 1.959963984540054);

}  // namespace ampeq::stats
