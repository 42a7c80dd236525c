#pragma once

// Time integration. The truncated SPDE runs in original time t with an
// exponential Euler step; reduced SDEs run in slow time T = eps^2 t with
// Euler-Maruyama. Recorded sample times are always slow times.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ampeq/amplitude.hpp"
#include "ampeq/noise.hpp"
#include "ampeq/spectral.hpp"

namespace ampeq {

struct SimConfig {
  double epsilon = 0.1;
  double T0 = 1.0;
  double dt_slow = 1e-3;
  /// c with delta_t * lambda_max <= c; must lie in (0, 2].
  double dt_fast_factor = 1.0;
  std::uint64_t seed = 1;
  double kappa = 0.01;
  std::size_t n_paths = 200;
  /// Multiplies both blow-up thresholds; 1 reproduces eps^{-kappa}, eps^{-3 kappa}.
  double guard_scale = 1.0;

  /// Throws Error(Config) on violated invariants.
  void validate() const;
  std::size_t n_slow_steps() const;
};

struct FastGrid {
  std::size_t substeps = 1;  ///< fast steps per slow step
  double dt_fast = 0.0;      ///< original-time step
};

/// Largest fast step with dt_fast * lambda_max <= c that tiles one slow step exactly.
FastGrid fast_grid(const ModelSpec& model, const SimConfig& config);
NoiseSource make_noise(const ModelSpec& model, const SimConfig& config, std::uint64_t stream = 0);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::optional<double> stopped_at;

  std::size_t size() const { return times.size(); }
};

/// Exponential Euler for the truncated SPDE. Linear noise coupling
/// G(u, eps) dW = sigma_eps G~ dW + eps G'(0)(u) dW. Records u at T = k dt_slow.
Trajectory simulate_spde(const ModelSpec& model, const SimConfig& config, const NoiseSource& noise,
                         std::size_t path, const SpectralField& u0);

struct AmplitudeOptions {
  /// Integrate on the fast grid (dT = dt_slow / substeps, increments eps dW)
  /// instead of one step per slow sample.
  bool fine_grid = false;
  bool guard = true;
};

/// Euler-Maruyama in slow time; channel j of the SDE uses noise channel j.
Trajectory simulate_amplitude(const AmplitudeSDE& sde, const SimConfig& config, const NoiseSource& noise,
                              std::size_t path, const Eigen::VectorXd& x0, AmplitudeOptions options = {});

/// Euler-Maruyama for dy = [Lbar y + 2F(y)] dT + Sigma^{1/2}(y) dW with dim channels.
Trajectory simulate_sigma_form(const Case2Spec& spec, const SimConfig& config, const NoiseSource& noise,
                               std::size_t path, const Eigen::VectorXd& y0, AmplitudeOptions options = {});

/// z' = e^{-lambda dT / eps^2} z + alpha sqrt((1 - e^{-2 lambda dT / eps^2}) / (2 lambda)) xi.
double ou_exact_step(double z, double lambda, double alpha, double epsilon, double dT, double xi);

/// Stable-mode OU processes Z_k(T), driven by the same fast increments as the
/// SPDE: Z <- e^{-lambda_k dt}(Z + alpha_k dW_k). Full-length vectors, kernel entries zero.
Trajectory simulate_ou_modes(const ModelSpec& model, const SimConfig& config, const NoiseSource& noise,
                             std::size_t path);

/// eps y(T) + eps e^{A T / eps^2} psi0 + eps Z(T) on the common sample grid.
Trajectory build_case2_approximation(const ModelSpec& model, const Trajectory& y_path, const SpectralField& psi0,
                                     const Trajectory& z_path, double epsilon);

/// Runs fn(i) for i < n across hardware threads; exceptions are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ampeq
