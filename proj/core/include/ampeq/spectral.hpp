#pragma once

// Truncated eigenbasis representation of the abstract model
//   du = [A u + eps^2 L u + B(u,u)] dt + G(u, eps) dW,
// with A e_k = -lambda_k e_k. Storage index k (0-based) always refers to the
// eigenfunction e_{k+1}; the first n_kernel indices span ker A.

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace ampeq {

/// Which additive-noise scaling sigma_eps the model is run under:
/// eps^2 (non-degenerate additive noise on the kernel) or eps (degenerate).
enum class NoiseScaling { AdditiveEps2, AdditiveEps1 };

/// Coefficient vector of u = sum_k gamma_k e_k, truncated to the model's modes.
struct SpectralField {
  Eigen::VectorXd coeffs;

  SpectralField() = default;
  explicit SpectralField(Eigen::VectorXd c) : coeffs(std::move(c)) {}
  static SpectralField zero(std::size_t n_modes) {
    return SpectralField(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_modes)));
  }
  static SpectralField unit(std::size_t n_modes, std::size_t k) {
    auto f = zero(n_modes);
    f.coeffs[static_cast<Eigen::Index>(k)] = 1.0;
    return f;
  }

  std::size_t size() const { return static_cast<std::size_t>(coeffs.size()); }
  double operator[](std::size_t k) const { return coeffs[static_cast<Eigen::Index>(k)]; }
  double& operator[](std::size_t k) { return coeffs[static_cast<Eigen::Index>(k)]; }

  friend SpectralField operator*(SpectralField f, double s) {
    f.coeffs *= s;
    return f;
  }
};

/// Coordinates of a kernel element over e_1..e_n.
struct KernelVector {
  Eigen::VectorXd coeffs;

  KernelVector() = default;
  explicit KernelVector(Eigen::VectorXd c) : coeffs(std::move(c)) {}
  static KernelVector zero(std::size_t n) {
    return KernelVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
  }

  std::size_t size() const { return static_cast<std::size_t>(coeffs.size()); }
  double operator[](std::size_t k) const { return coeffs[static_cast<Eigen::Index>(k)]; }
  double& operator[](std::size_t k) { return coeffs[static_cast<Eigen::Index>(k)]; }
};

/// One coordinate-sparse entry B_{ijk} = <B(e_i, e_j), e_k>, 0-based.
struct BilinearEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double value = 0.0;
};

/// Raw model description; ModelSpec validates and freezes it.
struct ModelData {
  std::size_t n_kernel = 1;
  Eigen::VectorXd lambdas;
  /// Slow-time drift L (n_modes x n_modes).
  Eigen::MatrixXd linear;
  /// Entries of B; (i,j) and (j,i) may both be given but must agree.
  std::vector<BilinearEntry> bilinear;
  /// alpha_j for channel j: G~ f_j = alpha_j e_j. Length = number of channels.
  Eigen::VectorXd noise_amplitudes;
  /// Per channel j, the matrix M_j with (M_j)(k, i) = <G'(0)(e_i) f_j, e_k>.
  std::vector<Eigen::MatrixXd> multiplicative;
  /// H^alpha index used for norms.
  double norm_index = 0.0;
  NoiseScaling scaling = NoiseScaling::AdditiveEps2;
};

/// Immutable spectral model. Safe to share across threads.
class ModelSpec {
 public:
  explicit ModelSpec(ModelData data);

  std::size_t n_kernel() const { return n_kernel_; }
  std::size_t n_modes() const { return static_cast<std::size_t>(lambdas_.size()); }
  std::size_t n_channels() const { return static_cast<std::size_t>(alphas_.size()); }
  /// Largest channel index with alpha_j != 0, plus one (the noise cutoff N).
  std::size_t noise_cutoff() const { return noise_cutoff_; }

  double lambda(std::size_t k) const { return lambdas_[static_cast<Eigen::Index>(k)]; }
  const Eigen::VectorXd& lambdas() const { return lambdas_; }
  /// rho = lambda_{n+1}, the spectral gap.
  double spectral_gap() const { return lambda(n_kernel_); }
  const Eigen::MatrixXd& linear() const { return linear_; }
  double alpha(std::size_t j) const { return alphas_[static_cast<Eigen::Index>(j)]; }
  const Eigen::VectorXd& alphas() const { return alphas_; }
  const Eigen::MatrixXd& multiplicative(std::size_t channel) const { return gprime_[channel]; }
  double norm_index() const { return norm_index_; }
  NoiseScaling scaling() const { return scaling_; }

  /// Canonical entries, i <= j, one per (i, j, k).
  const std::vector<BilinearEntry>& bilinear() const { return entries_; }
  /// B_{ijk}, symmetric in (i, j); zero when not stored.
  double b(std::size_t i, std::size_t j, std::size_t k) const;

  bool is_kernel(std::size_t k) const { return k < n_kernel_; }

  /// <B(a,a), e_m> = 0 for all a in ker A and m < n.
  bool satisfies_kernel_annihilation(double tol = 1e-12) const;
  /// B_{kkm} = 0 for stable k and kernel m (needed by the degenerate-noise reduction).
  bool satisfies_stable_diagonal_annihilation(double tol = 1e-12) const;

  /// Hot-loop kernel: out = B(u, v). `out` must not alias u or v.
  void apply_bilinear(const Eigen::Ref<const Eigen::VectorXd>& u,
                      const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> out) const;
  /// out = B(u, u), about half the work of apply_bilinear.
  void apply_quadratic(const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  std::size_t n_kernel_;
  Eigen::VectorXd lambdas_;
  Eigen::MatrixXd linear_;
  Eigen::VectorXd alphas_;
  std::vector<Eigen::MatrixXd> gprime_;
  double norm_index_;
  NoiseScaling scaling_;
  std::size_t noise_cutoff_ = 0;

  std::vector<BilinearEntry> entries_;
  // Struct-of-arrays copy of entries_ split into diagonal (i == j) and
  // off-diagonal parts for apply_bilinear / apply_quadratic.
  std::vector<int> di_, dk_, oi_, oj_, ok_;
  std::vector<double> dv_, ov_;
};

enum class Part { Kernel, Stable };

SpectralField project(const ModelSpec& model, const SpectralField& field, Part part);

/// (sum_k gamma_k^2 (lambda_k + 1)^alpha)^{1/2}.
double h_alpha_norm(const ModelSpec& model, const SpectralField& field, double alpha);
inline double h_alpha_norm(const ModelSpec& model, const SpectralField& field) {
  return h_alpha_norm(model, field, model.norm_index());
}

SpectralField eval_B(const ModelSpec& model, const SpectralField& u, const SpectralField& v);

/// A_s^{-1} P_s: stable coefficients multiplied by -1/lambda_k, kernel part dropped.
SpectralField apply_stable_inverse(const ModelSpec& model, const SpectralField& field);

/// Fully symmetrised F(u,v,w) = -B_c(u, A_s^{-1} B_s(v,w)).
KernelVector eval_F(const ModelSpec& model, const KernelVector& u, const KernelVector& v,
                    const KernelVector& w);

/// e^{A t} field.
SpectralField semigroup_step(const ModelSpec& model, const SpectralField& field, double t);

SpectralField embed(const ModelSpec& model, const KernelVector& a);
KernelVector kernel_coords(const ModelSpec& model, const SpectralField& field);

}  // namespace ampeq
