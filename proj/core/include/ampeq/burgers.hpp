#pragma once

// Stochastic Burgers equation on [0, pi] with Dirichlet conditions,
//   du = [(d_xx + 1) u + eps^2 nu u + u u_x] dt + (sigma_eps + eps u) dW,
// in the sine basis e_k = sqrt(2/pi) sin(kx), lambda_k = k^2 - 1.
// Noise covariance Q e_k = alpha_k^2 e_k with alpha_k = 0 for k > 3.

#include <array>
#include <cstddef>

#include "ampeq/spectral.hpp"

namespace ampeq {

struct BurgersParams {
  double nu = 0.0;
  std::array<double, 3> alphas{0.0, 0.0, 0.0};
  std::size_t n_modes = 32;
  NoiseScaling scaling = NoiseScaling::AdditiveEps2;
};

/// H^alpha index at which the Burgers nonlinearity is bounded.
inline constexpr double kBurgersNormIndex = 0.25;

/// <B(e_i, e_j), e_k> for B(u,v) = (u v_x + v u_x)/2, wavenumbers i, j, k >= 1.
double burgers_b_coeff(int i, int j, int k);

/// Integral over [0, pi] of sin(ax) sin(bx) sin(cx), for a, b, c >= 1.
double triple_sine_integral(int a, int b, int c);

/// Conversion factor from e_1 coordinates to sin(x) coordinates:
/// x e_1 = (sin_x_scale * x) sin(x).
double sin_x_scale();

ModelSpec build_burgers_model(const BurgersParams& params);

}  // namespace ampeq
