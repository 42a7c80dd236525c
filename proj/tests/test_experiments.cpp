#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ampeq/burgers.hpp"
#include "ampeq/error.hpp"
#include "ampeq/experiments.hpp"

using namespace ampeq;

namespace {

ModelSpec burgers(double nu, double a1, double a3, NoiseScaling s, std::size_t modes = 8) {
  BurgersParams p;
  p.nu = nu;
  p.alphas = {a1, 0.0, a3};
  p.n_modes = modes;
  p.scaling = s;
  return build_burgers_model(p);
}

AmplitudeSDE scalar_linear(double sigma1, double c) {
  AmplitudeSDE s;
  s.dim = 1;
  s.drift_lin = Eigen::MatrixXd::Constant(1, 1, sigma1);
  s.drift_cubic = {0.0};
  s.diff_add = {Eigen::VectorXd::Zero(1)};
  s.diff_mult = {Eigen::MatrixXd::Constant(1, 1, c)};
  return s;
}

}  // namespace

TEST_CASE("OU stationary variance") {
  const ModelSpec m = burgers(0.0, 0.0, 1.0, NoiseScaling::AdditiveEps1);
  SimConfig c;
  c.epsilon = 0.1;
  const OuVarianceReport r = ou_variance_test(m, c, 100000);
  REQUIRE(r.modes.size() == 2);
  CHECK(r.modes[0].expected == 0.0);
  CHECK(r.modes[0].variance == 0.0);
  CHECK(r.modes[1].expected == 0.0625);
  CHECK(r.modes[1].within_3se);
  c.epsilon = 0.05;
  const OuVarianceReport r2 = ou_variance_test(m, c, 100000);
  const double joint = std::hypot(r.modes[1].se, r2.modes[1].se);
  CHECK(std::abs(r.modes[1].variance - r2.modes[1].variance) < 3.0 * joint);
  CHECK_THROWS_AS(ou_variance_test(burgers(0.0, 0.0, 0.0, NoiseScaling::AdditiveEps1), c, 100), Error);
}

TEST_CASE("Lyapunov estimator") {
  LyapunovConfig lc;
  lc.T = 50.0;
  lc.n_paths = 200;
  const LyapunovEstimate det = estimate_lyapunov(scalar_linear(0.02, 0.0), lc);
  CHECK(det.exponent == doctest::Approx(0.02).epsilon(1e-3));
  CHECK(det.closed_form == 0.02);

  const double c = -8.0 * std::sqrt(2.0) / (15.0 * std::pow(std::numbers::pi, 1.5));
  const LyapunovEstimate e = estimate_lyapunov(scalar_linear(0.02, c), lc);
  CHECK(e.closed_form == doctest::Approx(0.010826).epsilon(1e-4));
  CHECK(std::abs(e.exponent - e.closed_form) < 3.0 * e.se);

  AmplitudeSDE add = scalar_linear(0.0, 0.1);
  add.diff_add[0][0] = 0.5;
  CHECK_THROWS_AS(estimate_lyapunov(add, lc), Error);
  AmplitudeSDE two = scalar_linear(0.0, 0.1);
  two.dim = 2;
  CHECK_THROWS_AS(estimate_lyapunov(two, lc), Error);
}

TEST_CASE("Lyapunov CI narrows with the horizon") {
  LyapunovConfig lc;
  lc.n_paths = 200;
  lc.T = 25.0;
  const LyapunovEstimate short_run = estimate_lyapunov(scalar_linear(0.0, 0.3), lc);
  lc.T = 100.0;
  const LyapunovEstimate long_run = estimate_lyapunov(scalar_linear(0.0, 0.3), lc);
  CHECK(long_run.se / short_run.se == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("stability scan is linear in nu") {
  LyapunovConfig lc;
  lc.T = 50.0;
  lc.n_paths = 200;
  const auto rep = run_stability([](double nu) { return scalar_linear(nu, 0.2); }, {0.0, 0.01, 0.02, 0.03}, lc);
  CHECK(rep.monotone);
  CHECK(rep.threshold_closed_form == doctest::Approx(0.02));
  CHECK(std::abs(rep.threshold_estimate - 0.02) < 3.0 * rep.threshold_se + 1e-3);
  CHECK_THROWS_AS(run_stability([](double nu) { return scalar_linear(nu, 0.2); }, {0.1}, lc), Error);
}

TEST_CASE("error scaling without noise") {
  const ModelSpec m = burgers(0.0, 0.0, 0.0, NoiseScaling::AdditiveEps2, 8);
  SimConfig c;
  c.T0 = 0.5;
  c.dt_slow = 0.01;
  c.n_paths = 2;
  ErrorScalingSetup s;
  s.kernel0 = Eigen::VectorXd::Constant(1, 0.5);
  s.bootstrap_resamples = 50;
  const ErrorReport r = run_error_scaling(m, ReductionCase::I, c, {0.2, 0.1}, s);
  REQUIRE(r.per_eps.size() == 2);
  CHECK(r.per_eps[0].errors[0] == r.per_eps[0].errors[1]);
  CHECK(r.per_eps[0].n_stopped == 0);
  CHECK(r.fitted_slope > 1.8);
  CHECK(r.theorem_exponent == doctest::Approx(1.81));
}

TEST_CASE("error scaling input checks and stopped flags") {
  const ModelSpec m = burgers(0.0, 0.3, 0.3, NoiseScaling::AdditiveEps2, 8);
  SimConfig c;
  c.T0 = 0.1;
  c.dt_slow = 0.01;
  c.n_paths = 2;
  ErrorScalingSetup s;
  s.kernel0 = Eigen::VectorXd::Constant(1, 0.5);
  CHECK_THROWS_AS(run_error_scaling(m, ReductionCase::I, c, {0.1, 0.2}, s), Error);
  CHECK_THROWS_AS(run_error_scaling(m, ReductionCase::II, c, {0.2, 0.1}, s), Error);
  c.guard_scale = 1e-3;
  const ErrorReport r = run_error_scaling(m, ReductionCase::I, c, {0.2, 0.1}, s);
  CHECK_FALSE(r.per_eps[0].usable);
  CHECK(r.per_eps[0].stopped_fraction.estimate == 1.0);
  CHECK(std::isnan(r.fitted_slope));
  CHECK(r.warnings.size() == 3);
}

TEST_CASE("case II law comparison without noise") {
  const ModelSpec m = burgers(0.0, 0.0, 0.0, NoiseScaling::AdditiveEps1, 8);
  SimConfig c;
  c.T0 = 0.2;
  c.dt_slow = 0.01;
  c.n_paths = 3;
  ErrorScalingSetup s;
  s.kernel0 = Eigen::VectorXd::Constant(1, 0.5);
  s.reduced_paths = 5;
  const MomentReport r = moment_compare_case2(m, c, {0.2, 0.1}, s);
  REQUIRE(r.per_eps.size() == 2);
  for (const auto& law : r.per_eps) {
    CHECK(law.full_var[0] < 1e-24);
    CHECK(law.reduced_var[0] < 1e-24);
  }
  CHECK(std::abs(r.per_eps[1].full_mean[0] - r.per_eps[1].reduced_mean[0]) <
        std::abs(r.per_eps[0].full_mean[0] - r.per_eps[0].reduced_mean[0]) + 1e-9);
  CHECK(std::abs(r.per_eps[1].full_mean[0] - r.per_eps[1].reduced_mean[0]) < 1e-3);
}

TEST_CASE("guard rarely fires for small noise") {
  const ModelSpec m = burgers(0.5, 0.1, 0.1, NoiseScaling::AdditiveEps2, 8);
  SimConfig c;
  c.T0 = 1.0;
  c.dt_slow = 1e-3;
  c.dt_fast_factor = 2.0;
  c.n_paths = 200;
  c.seed = 99;
  ErrorScalingSetup s;
  s.kernel0 = Eigen::VectorXd::Constant(1, 0.3);
  s.bootstrap_resamples = 0;
  const ErrorReport r = run_error_scaling(m, ReductionCase::I, c, {0.1, 0.05}, s);
  for (const auto& e : r.per_eps) CHECK(e.stopped_fraction.estimate < 0.01);
}
