#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ampeq/amplitude.hpp"
#include "ampeq/burgers.hpp"
#include "ampeq/error.hpp"
#include "oracle.hpp"

using namespace ampeq;

namespace {
const double kPi = std::numbers::pi;

ModelSpec burgers(double nu, double a1, double a2, double a3, NoiseScaling s = NoiseScaling::AdditiveEps2,
                  std::size_t modes = 32) {
  BurgersParams p;
  p.nu = nu;
  p.alphas = {a1, a2, a3};
  p.n_modes = modes;
  p.scaling = s;
  return build_burgers_model(p);
}
}  // namespace

TEST_CASE("F on the Burgers kernel") {
  const ModelSpec m = burgers(0.0, 0, 0, 0);
  KernelVector e1 = KernelVector::zero(1);
  e1[0] = 1.0;
  const double f = eval_F(m, e1, e1, e1)[0];
  CHECK(f == doctest::Approx(-1.0 / (12.0 * kPi)).epsilon(1e-13));
  // sin x = e_1 / s, so F(sin x) = s^{-3} f e_1 = s^{-2} f sin x.
  const double s = sin_x_scale();
  CHECK(std::abs(f / (s * s) + 1.0 / 24.0) < 1e-12);
}

TEST_CASE("case I coefficients") {
  const double a1 = 0.8;
  const double a3 = 1.3;
  const ModelSpec m = burgers(0.5, a1, 0.4, a3);
  const AmplitudeSDE sde = derive_case1(m);
  REQUIRE(sde.dim == 1);
  CHECK(sde.drift_lin(0, 0) == 0.5);
  CHECK(sde.cubic(0, 0, 0, 0) == doctest::Approx(-1.0 / (6.0 * kPi)).epsilon(1e-13));
  REQUIRE(sde.n_channels() == 3);
  CHECK(sde.diff_add[0][0] == a1);
  CHECK(sde.diff_add[1][0] == 0.0);
  const double c1 = 8.0 * std::sqrt(2.0) * a1 / (3.0 * std::pow(kPi, 1.5));
  const double c3 = -8.0 * std::sqrt(2.0) * a3 / (15.0 * std::pow(kPi, 1.5));
  CHECK(std::abs(sde.diff_mult[0](0, 0) - c1) < 1e-12);
  CHECK(std::abs(sde.diff_mult[1](0, 0)) < 1e-15);
  CHECK(std::abs(sde.diff_mult[2](0, 0) - c3) < 1e-12);

  const AmplitudeSDE sin_x = rescale(sde, sin_x_scale());
  CHECK(std::abs(sin_x.cubic(0, 0, 0, 0) + 1.0 / 12.0) < 1e-12);
  CHECK(std::abs(sin_x.diff_mult[0](0, 0) - c1) < 1e-12);
  CHECK(std::abs(sin_x.diff_add[0][0] - a1 * std::sqrt(2.0 / kPi)) < 1e-12);

  const AmplitudeSDE q = derive_case1(oracle::quadrature_burgers({0.5, {a1, 0.4, a3}, 32, NoiseScaling::AdditiveEps2}));
  CHECK(std::abs(q.cubic(0, 0, 0, 0) - sde.cubic(0, 0, 0, 0)) < 1e-10);
  CHECK(std::abs(q.diff_mult[2](0, 0) - c3) < 1e-10);
}

TEST_CASE("case I rejects kernel self-interaction") {
  ModelData d;
  d.n_kernel = 1;
  d.lambdas = Eigen::Vector2d(0.0, 1.0);
  d.linear = Eigen::Matrix2d::Zero();
  d.bilinear = {{0, 0, 0, 1.0}};
  d.noise_amplitudes = Eigen::VectorXd::Zero(0);
  const ModelSpec m(std::move(d));
  CHECK_THROWS_AS(derive_case1(m), Error);
}

TEST_CASE("case II constants for Burgers") {
  const double a3 = 0.9;
  const ModelSpec m = burgers(0.3, 0.0, 0.0, a3, NoiseScaling::AdditiveEps1);
  const Case2OneDim r = derive_case2_1d(m);
  CHECK(std::abs(r.sigmas.sigma1 - (0.3 + a3 * a3 / (4048.0 * kPi))) < 1e-12);
  CHECK(std::abs(r.sigmas.sigma2 + 1.0 / (6.0 * kPi)) < 1e-12);
  CHECK(std::abs(r.sigmas.sigma3 - 128.0 * a3 * a3 / (225.0 * std::pow(kPi, 3))) < 1e-12);
  CHECK(std::abs(r.sigmas.sigma4 - 648.0 * std::pow(a3, 4) / (1225.0 * std::pow(kPi, 3))) < 1e-12);

  const Case2OneDim q =
      derive_case2_1d(oracle::quadrature_burgers({0.3, {0.0, 0.0, a3}, 32, NoiseScaling::AdditiveEps1}));
  CHECK(std::abs(q.sigmas.sigma1 - r.sigmas.sigma1) < 1e-10);
  CHECK(std::abs(q.sigmas.sigma3 - r.sigmas.sigma3) < 1e-10);
  CHECK(std::abs(q.sigmas.sigma4 - r.sigmas.sigma4) < 1e-10);
}

TEST_CASE("case II preconditions") {
  CHECK_THROWS_AS(derive_lbar(burgers(0.0, 0.5, 0.0, 1.0, NoiseScaling::AdditiveEps1)), Error);
  ModelData d;
  d.n_kernel = 2;
  d.lambdas = Eigen::Vector3d(0.0, 0.0, 2.0);
  d.linear = Eigen::Matrix3d::Zero();
  d.noise_amplitudes = Eigen::VectorXd::Zero(0);
  CHECK_THROWS_AS(derive_case2_1d(ModelSpec(std::move(d))), Error);
}

TEST_CASE("sigma form at n = 1 matches the scalar diffusion") {
  const ModelSpec m = burgers(0.0, 0.0, 0.0, 1.0, NoiseScaling::AdditiveEps1);
  const Case2Spec spec = derive_case2(m);
  const Case2Sigmas s = *spec.sigmas;
  for (double y : {-1.0, 0.0, 0.4, 2.0}) {
    const Eigen::MatrixXd sig = spec.sigma_form(Eigen::VectorXd::Constant(1, y));
    CHECK(sig(0, 0) == doctest::Approx(s.sigma3 * y * y + s.sigma4).epsilon(1e-13));
  }
}

TEST_CASE("spd_sqrt") {
  Eigen::Matrix2d s;
  s << 4.0, 1.0, 1.0, 3.0;
  const Eigen::MatrixXd r = spd_sqrt(s);
  CHECK((r * r - s).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::Matrix2d bad;
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(spd_sqrt(bad), Error);
  Eigen::Matrix2d clamp;
  clamp << 1.0, 0.0, 0.0, -1e-12;
  CHECK(spd_sqrt(clamp)(1, 1) == 0.0);
}

TEST_CASE("stratonovich linear part") {
  const ModelSpec m = burgers(0.02, 0.0, 0.0, 1.0);
  const AmplitudeSDE sde = derive_case1(m);
  const auto strat = stratonovich_linear_part(sde);
  CHECK(strat.linear(0, 0) == doctest::Approx(0.02 - 64.0 / (225.0 * std::pow(kPi, 3))).epsilon(1e-12));
}
