#pragma once

// Monte Carlo campaigns: error scaling against the reduced equations,
// Lyapunov-based stability thresholds, OU stationary statistics and Case II
// distributional comparisons. All reports are deterministic given the seed.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ampeq/amplitude.hpp"
#include "ampeq/sim.hpp"
#include "ampeq/spectral.hpp"
#include "ampeq/stats.hpp"

namespace ampeq {

enum class ReductionCase { I, II };

struct ErrorScalingSetup {
  /// Rescaled kernel amplitude at T = 0 (x(0) or phi(0)).
  Eigen::VectorXd kernel0;
  /// Rescaled stable part at T = 0: b(0) for case I (u0 = eps a + eps^2 b),
  /// psi(0) for case II (u0 = eps phi + eps psi). Empty means zero.
  Eigen::VectorXd stable0;
  std::size_t bootstrap_resamples = 400;
  /// Size of the reduced-model sample used for law comparisons (case II).
  /// Zero selects 25 * n_paths.
  std::size_t reduced_paths = 0;
};

/// Law of the kernel modes at T0: full model against the reduced diffusion.
struct LawComparison {
  std::size_t full_samples = 0;
  std::size_t reduced_samples = 0;
  Eigen::VectorXd full_mean, reduced_mean, full_var, reduced_var;
  /// KS statistic per kernel coordinate, and the largest of them.
  std::vector<double> ks_per_mode;
  double ks = 0.0;
};

struct EpsilonResult {
  double epsilon = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_stopped = 0;
  stats::Interval stopped_fraction;
  /// sup over sample times before the stopping time, one entry per path.
  std::vector<double> errors;
  double mean = 0.0, median = 0.0, q10 = 0.0, q90 = 0.0;
  /// Fraction of paths whose error exceeds eps^{exponent}.
  double exceedance_threshold = 0.0;
  stats::Interval exceedance;
  bool usable = true;
  std::optional<LawComparison> law;
};

struct ErrorReport {
  ReductionCase reduction = ReductionCase::I;
  std::vector<double> eps_grid;
  std::vector<EpsilonResult> per_eps;
  double theorem_exponent = 0.0;
  double fitted_slope = 0.0;
  double slope_se = 0.0;
  std::size_t bootstrap_resamples = 0;
  std::size_t n_paths = 0;
  std::vector<std::string> warnings;
};

/// Case I: pathwise comparison of u(t) with eps x(eps^2 t) on shared noise.
/// Case II: comparison with eps(y e + Q + Z), y driven by an independent
/// Brownian motion, plus the kernel-law comparison at T0.
ErrorReport run_error_scaling(const ModelSpec& model, ReductionCase reduction, const SimConfig& config,
                              const std::vector<double>& eps_grid, const ErrorScalingSetup& setup);

struct LyapunovConfig {
  double T = 200.0;
  double dt = 0.01;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 7;
};

struct LyapunovEstimate {
  double exponent = 0.0;
  double se = 0.0;
  /// sigma_1 - 1/2 sum_j c_j^2 (Stratonovich linear rate).
  double closed_form = 0.0;
};

/// Top Lyapunov exponent of dv = sigma_1 v dT + sum_j c_j v dB_j for a 1-D
/// amplitude SDE without additive noise.
LyapunovEstimate estimate_lyapunov(const AmplitudeSDE& sde, const LyapunovConfig& config);

struct StabilityReport {
  std::vector<double> nu_grid;
  std::vector<LyapunovEstimate> estimates;
  /// Zero crossing of the fitted line through the estimates.
  double threshold_estimate = 0.0;
  double threshold_se = 0.0;
  /// Zero crossing of the closed form.
  double threshold_closed_form = 0.0;
  bool monotone = true;
};

/// sde_for(nu) builds the amplitude SDE at each grid point; the same random
/// numbers are used at every nu.
StabilityReport run_stability(const std::function<AmplitudeSDE(double)>& sde_for, const std::vector<double>& nu_grid,
                              const LyapunovConfig& config);

struct OuModeStats {
  std::size_t mode = 0;  ///< 0-based
  double expected = 0.0;
  double variance = 0.0;
  double se = 0.0;
  double mean = 0.0;
  double mean_se = 0.0;
  bool within_3se = true;
};

struct OuVarianceReport {
  double epsilon = 0.0;
  std::size_t n_samples = 0;
  std::vector<OuModeStats> modes;
};

/// Long exact-transition chain with step eps^2 per stable mode carrying noise.
OuVarianceReport ou_variance_test(const ModelSpec& model, const SimConfig& config, std::size_t n_samples);

struct MomentReport {
  std::vector<double> eps_grid;
  std::vector<LawComparison> per_eps;
  bool ks_decreasing = false;
  std::vector<std::string> warnings;
};

MomentReport moment_compare_case2(const ModelSpec& model, const SimConfig& config, const std::vector<double>& eps_grid,
                                  const ErrorScalingSetup& setup);

}  // namespace ampeq
