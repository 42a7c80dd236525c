#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ampeq/burgers.hpp"
#include "ampeq/error.hpp"
#include "oracle.hpp"

using namespace ampeq;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("b coefficients match closed values and quadrature") {
  const double s = 1.0 / std::sqrt(2.0 * kPi);
  CHECK(burgers_b_coeff(1, 1, 2) == doctest::Approx(s).epsilon(1e-14));
  CHECK(burgers_b_coeff(1, 2, 1) == doctest::Approx(-0.5 * s).epsilon(1e-14));
  CHECK(burgers_b_coeff(1, 2, 3) == doctest::Approx(1.5 * s).epsilon(1e-14));
  double worst = 0.0;
  for (int i = 1; i <= 16; ++i) {
    for (int j = 1; j <= 16; ++j) {
      for (int k = 1; k <= 16; ++k) worst = std::max(worst, std::abs(burgers_b_coeff(i, j, k) - oracle::burgers_b(i, j, k)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("triple sine integral") {
  CHECK(triple_sine_integral(1, 1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(triple_sine_integral(1, 1, 2) == 0.0);
  CHECK(triple_sine_integral(1, 2, 3) == 0.0);
  CHECK(triple_sine_integral(1, 3, 1) == doctest::Approx(-4.0 / 15.0).epsilon(1e-14));
  CHECK(triple_sine_integral(1, 3, 3) == doctest::Approx(36.0 / 35.0).epsilon(1e-14));
  double worst = 0.0;
  for (int a = 1; a <= 20; ++a) {
    for (int b = 1; b <= 20; ++b) {
      for (int c = 1; c <= 20; ++c) {
        const double v = triple_sine_integral(a, b, c);
        if ((a + b + c) % 2 == 0) CHECK(v == 0.0);
        worst = std::max(worst, std::abs(v - oracle::triple_sine(a, b, c)));
      }
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("model assembly") {
  BurgersParams p;
  p.nu = 0.7;
  p.alphas = {0.5, 0.2, 1.0};
  p.n_modes = 12;
  const ModelSpec m = build_burgers_model(p);
  CHECK(m.n_kernel() == 1);
  CHECK(m.lambda(2) == 8.0);
  CHECK(m.spectral_gap() == 3.0);
  CHECK(m.linear()(0, 0) == 0.7);
  CHECK(m.norm_index() == kBurgersNormIndex);
  CHECK(m.satisfies_kernel_annihilation());
  CHECK(m.satisfies_stable_diagonal_annihilation());
  CHECK(m.multiplicative(0)(0, 0) ==
        doctest::Approx(0.5 * std::pow(2.0 / kPi, 1.5) * 4.0 / 3.0).epsilon(1e-14));

  const ModelSpec q = oracle::quadrature_burgers(p);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      for (std::size_t k = 0; k < 12; ++k) CHECK(std::abs(m.b(i, j, k) - q.b(i, j, k)) < 1e-10);
    }
  }
  for (std::size_t c = 0; c < 3; ++c) CHECK((m.multiplicative(c) - q.multiplicative(c)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("invalid parameters") {
  BurgersParams p;
  p.n_modes = 3;
  CHECK_THROWS_AS(build_burgers_model(p), Error);
  p.n_modes = 8;
  p.nu = std::nan("");
  CHECK_THROWS_AS(build_burgers_model(p), Error);
}
