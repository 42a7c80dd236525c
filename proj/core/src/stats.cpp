#include "ampeq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ampeq/error.hpp"

namespace ampeq::stats {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(ErrorCode::Precondition, "mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double acc = 0.0;
  for (const double x : xs) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(xs.size() - 1);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw Error(ErrorCode::Precondition, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::Domain, "quantile level outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::Precondition, "ols needs >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::Precondition, "ols needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return fit;
}

BootstrapSlope bootstrap_log_slope(const std::vector<double>& eps, const std::vector<std::vector<double>>& samples,
                                   std::size_t resamples, std::uint64_t seed) {
  if (eps.size() != samples.size() || eps.size() < 2) {
    throw Error(ErrorCode::Precondition, "bootstrap needs one sample per eps and >= 2 eps values");
  }
  std::vector<double> log_eps(eps.size());
  std::vector<double> log_err(eps.size());
  for (std::size_t g = 0; g < eps.size(); ++g) {
    if (samples[g].empty()) throw Error(ErrorCode::Precondition, "empty error sample");
    log_eps[g] = std::log(eps[g]);
    log_err[g] = std::log(mean(samples[g]));
  }
  BootstrapSlope out;
  out.slope = ols(log_eps, log_err).slope;
  out.resamples = resamples;
  if (resamples < 2) return out;

  std::mt19937_64 rng(seed);
  std::vector<double> slopes(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t g = 0; g < eps.size(); ++g) {
      const auto& s = samples[g];
      std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
      double acc = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) acc += s[pick(rng)];
      log_err[g] = std::log(acc / static_cast<double>(s.size()));
    }
    slopes[b] = ols(log_eps, log_err).slope;
  }
  out.se = std::sqrt(variance(slopes));
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::Precondition, "KS statistic needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

Interval wilson(std::size_t k, std::size_t n, double z) {
  if (n == 0 || k > n) throw Error(ErrorCode::Precondition, "wilson interval needs 0 <= k <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  const double lower = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double upper = k == n ? 1.0 : std::min(1.0, centre + half);
  return {p, lower, upper};
}

}  // namespace ampeq::stats
