#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ampeq/error.hpp"
#include "ampeq/spectral.hpp"

using namespace ampeq;

namespace {

ModelSpec toy(double b112 = 0.5) {
  ModelData d;
  d.n_kernel = 1;
  d.lambdas = Eigen::Vector3d(0.0, 2.0, 5.0);
  d.linear = Eigen::Matrix3d::Identity();
  d.bilinear = {{0, 0, 1, b112}, {0, 1, 0, -0.25}, {1, 0, 0, -0.25}, {0, 1, 2, 0.75}};
  d.noise_amplitudes = Eigen::Vector2d(1.0, 0.5);
  d.multiplicative = {Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Identity()};
  d.norm_index = 0.5;
  return ModelSpec(std::move(d));
}

}  // namespace

TEST_CASE("model validation") {
  const ModelSpec m = toy();
  CHECK(m.n_modes() == 3);
  CHECK(m.noise_cutoff() == 2);
  CHECK(m.spectral_gap() == 2.0);
  CHECK(m.b(1, 0, 0) == -0.25);
  CHECK(m.b(2, 1, 0) == 0.0);

  ModelData d;
  d.n_kernel = 1;
  d.lambdas = Eigen::Vector2d(0.0, 0.0);
  d.linear = Eigen::Matrix2d::Zero();
  d.noise_amplitudes = Eigen::VectorXd::Zero(0);
  CHECK_THROWS_AS(ModelSpec{d}, Error);
  d.lambdas = Eigen::Vector2d(0.0, 1.0);
  d.bilinear = {{0, 1, 1, 1.0}, {1, 0, 1, 2.0}};
  CHECK_THROWS_AS(ModelSpec{d}, Error);
  d.bilinear = {{0, 5, 1, 1.0}};
  CHECK_THROWS_AS(ModelSpec{d}, Error);
  d.bilinear.clear();
  d.noise_amplitudes = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(ModelSpec{d}, Error);
}

TEST_CASE("error codes carry their name") {
  try {
    throw Error(ErrorCode::NotPsd, "x");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPsd);
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
}

TEST_CASE("bilinear evaluation") {
  const ModelSpec m = toy();
  SpectralField u(Eigen::Vector3d(1.0, 2.0, -1.0));
  SpectralField v(Eigen::Vector3d(0.5, -1.0, 3.0));
  const SpectralField b = eval_B(m, u, v);
  // B(u,v)_k = sum_ij B_ijk u_i v_j
  Eigen::Vector3d ref = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) ref[static_cast<Eigen::Index>(k)] += m.b(i, j, k) * u[i] * v[j];
  CHECK((b.coeffs - ref).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::VectorXd q(3);
  m.apply_quadratic(u.coeffs, q);
  CHECK((q - eval_B(m, u, u).coeffs).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(eval_B(m, SpectralField::zero(2), v), Error);
}

TEST_CASE("norms, projections and the semigroup") {
  const ModelSpec m = toy();
  SpectralField u(Eigen::Vector3d(1.0, 2.0, -1.0));
  CHECK(h_alpha_norm(m, u, 0.0) == doctest::Approx(std::sqrt(6.0)));
  CHECK(h_alpha_norm(m, u) == doctest::Approx(std::sqrt(1.0 + 4.0 * std::sqrt(3.0) + std::sqrt(6.0))));
  CHECK(project(m, u, Part::Kernel)[1] == 0.0);
  CHECK(project(m, u, Part::Stable)[0] == 0.0);
  const SpectralField s = semigroup_step(m, u, 0.5);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK_THROWS_AS(semigroup_step(m, u, -1.0), Error);
  SpectralField bad = u;
  bad[1] = std::nan("");
  CHECK_THROWS_AS(h_alpha_norm(m, bad), Error);
  const SpectralField inv = apply_stable_inverse(m, u);
  CHECK(inv[0] == 0.0);
  CHECK(inv[1] == -1.0);
  CHECK(inv[2] == doctest::Approx(0.2));
}

TEST_CASE("annihilation checks and F") {
  const ModelSpec m = toy();
  CHECK(m.satisfies_kernel_annihilation());
  CHECK(m.satisfies_stable_diagonal_annihilation());
  KernelVector a = KernelVector::zero(1);
  a[0] = 2.0;
  // F(a) = -B_c(a, A_s^{-1} B_s(a, a)); B_s(a,a) = 4 * 0.5 e_2, A_s^{-1} -> -1 e_2 / 2 * 2 = -1 e_2
  // B_c(a, -e_2) = 2 * (-0.25) * (-1) = 0.5, so F = -0.5.
  CHECK(eval_F(m, a, a, a)[0] == doctest::Approx(-0.5));
}
