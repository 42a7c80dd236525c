#include "ampeq/burgers.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ampeq/error.hpp"

namespace ampeq {
namespace {

// Integral over [0, pi] of cos(mx) sin(cx).
double cos_sin_integral(int m, int c) {
  m = std::abs(m);
  if ((c + m) % 2 == 0) return 0.0;
  return 2.0 * c / (static_cast<double>(c) * c - static_cast<double>(m) * m);
}

}  // namespace

double burgers_b_coeff(int i, int j, int k) {
  // B(e_i, e_j) = (1/2) d/dx (e_i e_j) and
  // e_i e_j = (1/pi) [cos((i-j)x) - cos((i+j)x)].
  const double c = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  double out = 0.0;
  if (k == i + j) out += (i + j) * c;
  if (k == std::abs(i - j)) out -= std::abs(i - j) * c;
  return out;
}

double triple_sine_integral(int a, int b, int c) {
  // sin(ax) sin(bx) = [cos((a-b)x) - cos((a+b)x)] / 2.
  return 0.5 * (cos_sin_integral(a - b, c) - cos_sin_integral(a + b, c));
}

double sin_x_scale() { return std::sqrt(2.0 / std::numbers::pi); }

ModelSpec build_burgers_model(const BurgersParams& params) {
  if (params.n_modes < 4) throw Error(ErrorCode::Config, "Burgers model needs at least 4 modes");
  if (!std::isfinite(params.nu)) throw Error(ErrorCode::Config, "nu must be finite");
  for (double a : params.alphas) {
    if (!std::isfinite(a)) throw Error(ErrorCode::Config, "noise amplitudes must be finite");
  }

  const auto n = params.n_modes;
  const auto nm = static_cast<Eigen::Index>(n);
  ModelData data;
  data.n_kernel = 1;
  data.lambdas.resize(nm);
  for (Eigen::Index k = 0; k < nm; ++k) data.lambdas[k] = static_cast<double>((k + 1) * (k + 1) - 1);
  data.linear = params.nu * Eigen::MatrixXd::Identity(nm, nm);

  for (int i = 1; i <= static_cast<int>(n); ++i) {
    for (int j = i; j <= static_cast<int>(n); ++j) {
      for (int k : {i + j, j - i}) {
        if (k < 1 || k > static_cast<int>(n)) continue;
        const double v = burgers_b_coeff(i, j, k);
        if (v != 0.0) data.bilinear.push_back({i - 1, j - 1, k - 1, v});
      }
    }
  }

  data.noise_amplitudes = Eigen::Vector3d(params.alphas[0], params.alphas[1], params.alphas[2]);
  // G(u) v = u Q^{1/2} v, so G'(0)(e_i) f_j = alpha_j e_i e_j, expanded back onto
  // the sine basis: <e_i e_j, e_k> = (2/pi)^{3/2} I(i, j, k).
  const double norm = std::pow(2.0 / std::numbers::pi, 1.5);
  for (int j = 1; j <= 3; ++j) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nm, nm);
    const double aj = params.alphas[static_cast<std::size_t>(j - 1)];
    if (aj != 0.0) {
      for (int k = 1; k <= static_cast<int>(n); ++k) {
        for (int i = 1; i <= static_cast<int>(n); ++i) m(k - 1, i - 1) = aj * norm * triple_sine_integral(i, j, k);
      }
    }
    data.multiplicative.push_back(std::move(m));
  }
  data.norm_index = kBurgersNormIndex;
  data.scaling = params.scaling;
  return ModelSpec(std::move(data));
}

}  // namespace ampeq
