#pragma once

// Reduced (amplitude) equations extracted from a ModelSpec. Every derived SDE
// is in Ito form over the kernel coordinates e_1..e_n, in slow time T = eps^2 t.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "ampeq/spectral.hpp"

namespace ampeq {

/// dx = [drift_lin x + cubic(x,x,x)] dT + sum_j [diff_add_j + diff_mult_j x] dB_j  (Ito).
struct AmplitudeSDE {
  std::size_t dim = 0;
  Eigen::MatrixXd drift_lin;
  /// dim^4 entries; cubic(x)_m = sum_{abc} drift_cubic[m][a][b][c] x_a x_b x_c,
  /// symmetric in (a, b, c). Flattened row-major.
  std::vector<double> drift_cubic;
  /// One additive vector and one multiplicative matrix per driving Brownian motion.
  std::vector<Eigen::VectorXd> diff_add;
  std::vector<Eigen::MatrixXd> diff_mult;

  std::size_t n_channels() const { return diff_add.size(); }
  double cubic(std::size_t m, std::size_t a, std::size_t b, std::size_t c) const {
    return drift_cubic[((m * dim + a) * dim + b) * dim + c];
  }
  Eigen::VectorXd drift(const Eigen::VectorXd& x) const;
  Eigen::VectorXd diffusion(std::size_t channel, const Eigen::VectorXd& x) const;
  bool all_finite() const;
};

/// Sigma(phi) = sum_j (V_j phi)(V_j phi)^T + sum_r weight_r w_r w_r^T.
struct SigmaForm {
  std::vector<Eigen::MatrixXd> linear_factors;
  std::vector<Eigen::VectorXd> constant_vectors;
  std::vector<double> constant_weights;

  Eigen::MatrixXd operator()(const Eigen::VectorXd& phi) const;
};

struct Case2Sigmas {
  double sigma1 = 0.0;  ///< <Lbar e_1, e_1>
  double sigma2 = 0.0;  ///< 2 <F(e_1), e_1>
  double sigma3 = 0.0;  ///< phi^2 coefficient of the diffusion
  double sigma4 = 0.0;  ///< constant part of the diffusion
};

/// Averaged reduction for degenerate additive noise:
///   dy = [Lbar y + 2F(y)] dT + Sigma^{1/2}(y) dW_N.
struct Case2Spec {
  std::size_t dim = 0;
  Eigen::MatrixXd lbar;
  std::vector<double> drift_cubic;
  SigmaForm sigma_form;
  std::optional<Case2Sigmas> sigmas;  ///< only when dim == 1
};

/// Flattened 2F tensor over the kernel, in the AmplitudeSDE layout.
std::vector<double> cubic_tensor(const ModelSpec& model);

/// dx = [L_c x + 2F(x)] dT + [G~_c + G'_c(0) x] dW~, one channel per model noise channel.
AmplitudeSDE derive_case1(const ModelSpec& model);

Eigen::MatrixXd derive_lbar(const ModelSpec& model);
SigmaForm derive_sigma_form(const ModelSpec& model);
Case2Spec derive_case2(const ModelSpec& model);

struct Case2OneDim {
  Case2Sigmas sigmas;
  /// dy = (s1 y + s2 y^3) dT + sqrt(s3) y dB_1 + sqrt(s4) dB_2, which has the
  /// same law as dy = (s1 y + s2 y^3) dT + (s3 y^2 + s4)^{1/2} dB.
  AmplitudeSDE sde;
};
Case2OneDim derive_case2_1d(const ModelSpec& model);

/// Expanded-channel Ito SDE whose generator matches the Sigma^{1/2} form.
AmplitudeSDE case2_channel_form(const Case2Spec& spec);

/// Symmetric square root of a symmetric PSD matrix; eigenvalues in
/// [-kPsdClamp, 0) are clamped to zero.
inline constexpr double kPsdClamp = 1e-10;
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s);

/// Coordinates x~ = scale * x; e.g. scale = sin_x_scale() maps e_1 to sin(x) units.
AmplitudeSDE rescale(const AmplitudeSDE& sde, double scale);

/// Linear part of the Stratonovich drift: drift_lin - 1/2 sum_j M_j M_j, and the
/// constant shift -1/2 sum_j M_j a_j.
struct StratonovichLinearPart {
  Eigen::MatrixXd linear;
  Eigen::VectorXd constant;
};
StratonovichLinearPart stratonovich_linear_part(const AmplitudeSDE& sde);

}  // namespace ampeq
