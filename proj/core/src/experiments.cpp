#include "ampeq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ampeq/error.hpp"
#include "ampeq/noise.hpp"

namespace ampeq {
namespace {

constexpr std::uint64_t kReducedPathStream = 1;
constexpr std::uint64_t kReducedLawStream = 2;
constexpr std::uint64_t kOuChainStream = 3;

void require_eps_grid(const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw Error(ErrorCode::Config, "eps_grid is empty");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0 && eps_grid[i] <= 0.5)) throw Error(ErrorCode::Config, "eps_grid values must lie in (0, 0.5]");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) throw Error(ErrorCode::Config, "eps_grid must be strictly decreasing");
  }
}

SpectralField initial_field(const ModelSpec& model, ReductionCase reduction, const ErrorScalingSetup& setup,
                            double eps) {
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  if (setup.kernel0.size() != n) throw Error(ErrorCode::Dimension, "kernel0 must have n_kernel entries");
  SpectralField u = SpectralField::zero(model.n_modes());
  u.coeffs.head(n) = eps * setup.kernel0;
  if (setup.stable0.size() != 0) {
    if (static_cast<std::size_t>(setup.stable0.size()) != model.n_modes()) {
      throw Error(ErrorCode::Dimension, "stable0 must have n_modes entries");
    }
    const double scale = reduction == ReductionCase::I ? eps * eps : eps;
    u.coeffs.tail(u.coeffs.size() - n) += scale * setup.stable0.tail(u.coeffs.size() - n);
  }
  return u;
}

SpectralField stable_part(const ModelSpec& model, const ErrorScalingSetup& setup) {
  SpectralField psi = SpectralField::zero(model.n_modes());
  if (setup.stable0.size() != 0) {
    const auto n = static_cast<Eigen::Index>(model.n_kernel());
    psi.coeffs.tail(psi.coeffs.size() - n) = setup.stable0.tail(psi.coeffs.size() - n);
  }
  return psi;
}

double sup_error(const ModelSpec& model, const Trajectory& u, const Trajectory& approx, double scale_kernel_only) {
  const std::size_t len = std::min(u.size(), approx.size());
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  double sup = 0.0;
  SpectralField diff = SpectralField::zero(model.n_modes());
  for (std::size_t i = 0; i < len; ++i) {
    diff.coeffs = u.states[i];
    if (approx.states[i].size() == n) {
      diff.coeffs.head(n) -= scale_kernel_only * approx.states[i];
    } else {
      diff.coeffs -= approx.states[i];
    }
    sup = std::max(sup, h_alpha_norm(model, diff));
  }
  return sup;
}

void summarise(EpsilonResult& r, double exponent) {
  r.n_paths = r.errors.size();
  r.stopped_fraction = stats::wilson(r.n_stopped, r.n_paths);
  r.usable = r.n_stopped < r.n_paths;
  r.mean = stats::mean(r.errors);
  r.median = stats::quantile(r.errors, 0.5);
  r.q10 = stats::quantile(r.errors, 0.1);
  r.q90 = stats::quantile(r.errors, 0.9);
  r.exceedance_threshold = std::pow(r.epsilon, exponent);
  const auto over = static_cast<std::size_t>(std::count_if(
      r.errors.begin(), r.errors.end(), [&](double e) { return e > r.exceedance_threshold; }));
  r.exceedance = stats::wilson(over, r.n_paths);
}

LawComparison compare_laws(const std::vector<Eigen::VectorXd>& full, const std::vector<Eigen::VectorXd>& reduced,
                           Eigen::Index n) {
  LawComparison law;
  law.full_samples = full.size();
  law.reduced_samples = reduced.size();
  law.full_mean = Eigen::VectorXd::Zero(n);
  law.reduced_mean = Eigen::VectorXd::Zero(n);
  law.full_var = Eigen::VectorXd::Zero(n);
  law.reduced_var = Eigen::VectorXd::Zero(n);
  law.ks = std::numeric_limits<double>::quiet_NaN();
  if (full.empty() || reduced.empty()) return law;
  law.ks = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& v : full) a.push_back(v[k]);
    for (const auto& v : reduced) b.push_back(v[k]);
    law.full_mean[k] = stats::mean(a);
    law.reduced_mean[k] = stats::mean(b);
    law.full_var[k] = stats::variance(a);
    law.reduced_var[k] = stats::variance(b);
    law.ks_per_mode.push_back(stats::ks_statistic(a, b));
    law.ks = std::max(law.ks, law.ks_per_mode.back());
  }
  return law;
}

// Reduced case II dynamics: the scalar SDE for n = 1, the Sigma^{1/2} form otherwise.
Trajectory simulate_case2_reduced(const Case2Spec& spec, const std::optional<AmplitudeSDE>& scalar,
                                  const SimConfig& cfg, const NoiseSource& noise, std::size_t path,
                                  const Eigen::VectorXd& y0) {
  if (scalar) return simulate_amplitude(*scalar, cfg, noise, path, y0);
  return simulate_sigma_form(spec, cfg, noise, path, y0);
}

EpsilonResult case2_epsilon(const ModelSpec& model, const SimConfig& cfg, const ErrorScalingSetup& setup,
                            const Case2Spec& spec, const std::optional<AmplitudeSDE>& scalar, double exponent) {
  const NoiseSource noise = make_noise(model, cfg);
  const NoiseSource reduced_noise = NoiseSource::slow_only(cfg.seed, cfg.dt_slow, kReducedPathStream);
  const SpectralField u0 = initial_field(model, ReductionCase::II, setup, cfg.epsilon);
  const SpectralField psi0 = stable_part(model, setup);
  const auto n = static_cast<Eigen::Index>(model.n_kernel());

  EpsilonResult r;
  r.epsilon = cfg.epsilon;
  r.errors.assign(cfg.n_paths, 0.0);
  std::vector<char> stopped(cfg.n_paths, 0);
  std::vector<std::optional<Eigen::VectorXd>> finals(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    const Trajectory u = simulate_spde(model, cfg, noise, p, u0);
    const Trajectory y = simulate_case2_reduced(spec, scalar, cfg, reduced_noise, p, setup.kernel0);
    const Trajectory z = simulate_ou_modes(model, cfg, noise, p);
    const Trajectory approx = build_case2_approximation(model, y, psi0, z, cfg.epsilon);
    r.errors[p] = sup_error(model, u, approx, 1.0);
    stopped[p] = (u.stopped_at || y.stopped_at) ? 1 : 0;
    if (!u.stopped_at) finals[p] = Eigen::VectorXd(u.states.back().head(n) / cfg.epsilon);
  });
  r.n_stopped = static_cast<std::size_t>(std::count(stopped.begin(), stopped.end(), 1));

  const std::size_t n_reduced = setup.reduced_paths == 0 ? 25 * cfg.n_paths : setup.reduced_paths;
  const NoiseSource law_noise = NoiseSource::slow_only(cfg.seed, cfg.dt_slow, kReducedLawStream);
  std::vector<std::optional<Eigen::VectorXd>> reduced_finals(n_reduced);
  parallel_for(n_reduced, [&](std::size_t p) {
    const Trajectory y = simulate_case2_reduced(spec, scalar, cfg, law_noise, p, setup.kernel0);
    if (!y.stopped_at) reduced_finals[p] = y.states.back();
  });
  std::vector<Eigen::VectorXd> full;
  std::vector<Eigen::VectorXd> reduced;
  for (auto& f : finals) {
    if (f) full.push_back(std::move(*f));
  }
  for (auto& f : reduced_finals) {
    if (f) reduced.push_back(std::move(*f));
  }
  r.law = compare_laws(full, reduced, n);
  summarise(r, exponent);
  return r;
}

EpsilonResult case1_epsilon(const ModelSpec& model, const SimConfig& cfg, const ErrorScalingSetup& setup,
                            const AmplitudeSDE& sde, double exponent) {
  const NoiseSource noise = make_noise(model, cfg);
  const SpectralField u0 = initial_field(model, ReductionCase::I, setup, cfg.epsilon);
  EpsilonResult r;
  r.epsilon = cfg.epsilon;
  r.errors.assign(cfg.n_paths, 0.0);
  std::vector<char> stopped(cfg.n_paths, 0);
  AmplitudeOptions opts;
  opts.fine_grid = true;
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    const Trajectory u = simulate_spde(model, cfg, noise, p, u0);
    const Trajectory x = simulate_amplitude(sde, cfg, noise, p, setup.kernel0, opts);
    r.errors[p] = sup_error(model, u, x, cfg.epsilon);
    stopped[p] = (u.stopped_at || x.stopped_at) ? 1 : 0;
  });
  r.n_stopped = static_cast<std::size_t>(std::count(stopped.begin(), stopped.end(), 1));
  summarise(r, exponent);
  return r;
}

void require_scaling(const ModelSpec& model, ReductionCase reduction) {
  const NoiseScaling want = reduction == ReductionCase::I ? NoiseScaling::AdditiveEps2 : NoiseScaling::AdditiveEps1;
  if (model.scaling() != want) {
    throw Error(ErrorCode::Precondition, reduction == ReductionCase::I
                                             ? "case I needs the eps^2 additive-noise scaling"
                                             : "case II needs the eps additive-noise scaling");
  }
}

std::optional<AmplitudeSDE> scalar_case2(const ModelSpec& model) {
  if (model.n_kernel() != 1) return std::nullopt;
  return derive_case2_1d(model).sde;
}

}  // namespace

ErrorReport run_error_scaling(const ModelSpec& model, ReductionCase reduction, const SimConfig& config,
                              const std::vector<double>& eps_grid, const ErrorScalingSetup& setup) {
  require_eps_grid(eps_grid);
  require_scaling(model, reduction);
  ErrorReport report;
  report.reduction = reduction;
  report.eps_grid = eps_grid;
  report.n_paths = config.n_paths;
  report.theorem_exponent = reduction == ReductionCase::I ? 2.0 - 19.0 * config.kappa
                                                          : 16.0 / 15.0 - 13.0 * config.kappa;

  std::optional<AmplitudeSDE> case1;
  std::optional<Case2Spec> case2;
  std::optional<AmplitudeSDE> scalar;
  if (reduction == ReductionCase::I) {
    case1 = derive_case1(model);
  } else {
    case2 = derive_case2(model);
    scalar = scalar_case2(model);
  }

  for (const double eps : eps_grid) {
    SimConfig cfg = config;
    cfg.epsilon = eps;
    cfg.validate();
    EpsilonResult r = reduction == ReductionCase::I
                          ? case1_epsilon(model, cfg, setup, *case1, report.theorem_exponent)
                          : case2_epsilon(model, cfg, setup, *case2, scalar, report.theorem_exponent);
    if (!r.usable) report.warnings.push_back("all paths stopped at eps = " + std::to_string(eps));
    report.per_eps.push_back(std::move(r));
  }

  std::vector<double> eps_used;
  std::vector<std::vector<double>> samples;
  for (const auto& r : report.per_eps) {
    if (!r.usable) continue;
    eps_used.push_back(r.epsilon);
    samples.push_back(r.errors);
  }
  if (eps_used.size() >= 2) {
    const auto fit = stats::bootstrap_log_slope(eps_used, samples, setup.bootstrap_resamples, config.seed);
    report.fitted_slope = fit.slope;
    report.slope_se = fit.se;
    report.bootstrap_resamples = fit.resamples;
  } else {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    report.slope_se = std::numeric_limits<double>::quiet_NaN();
    report.warnings.push_back("fewer than two usable eps values; no slope fitted");
  }
  return report;
}

LyapunovEstimate estimate_lyapunov(const AmplitudeSDE& sde, const LyapunovConfig& config) {
  if (sde.dim != 1) throw Error(ErrorCode::Dimension, "Lyapunov estimator needs a one-dimensional SDE");
  for (const auto& a : sde.diff_add) {
    if (a[0] != 0.0) throw Error(ErrorCode::Precondition, "linearisation about 0 needs zero additive noise");
  }
  if (!(config.T > 0.0 && config.dt > 0.0) || config.n_paths < 2) {
    throw Error(ErrorCode::Config, "Lyapunov run needs T > 0, dt > 0 and at least two paths");
  }
  const double sigma1 = sde.drift_lin(0, 0);
  std::vector<std::size_t> channels;
  std::vector<double> coeffs;
  LyapunovEstimate out;
  out.closed_form = sigma1;
  for (std::size_t j = 0; j < sde.n_channels(); ++j) {
    const double c = sde.diff_mult[j](0, 0);
    out.closed_form -= 0.5 * c * c;
    if (c != 0.0) {
      channels.push_back(j);
      coeffs.push_back(c);
    }
  }
  const auto n_steps = static_cast<std::size_t>(std::llround(config.T / config.dt));
  const double T = static_cast<double>(n_steps) * config.dt;
  const NoiseSource noise = NoiseSource::slow_only(config.seed, config.dt);
  const double sqrt_dt = std::sqrt(config.dt);

  std::vector<double> rates(config.n_paths);
  parallel_for(config.n_paths, [&](std::size_t p) {
    std::vector<std::vector<double>> xi(channels.size(), std::vector<double>(n_steps));
    for (std::size_t c = 0; c < channels.size(); ++c) noise.fill_standard_normals(p, channels[c], 0, n_steps, xi[c].data());
    double acc = 0.0;
    for (std::size_t s = 0; s < n_steps; ++s) {
      double factor = 1.0 + sigma1 * config.dt;
      for (std::size_t c = 0; c < channels.size(); ++c) factor += coeffs[c] * sqrt_dt * xi[c][s];
      acc += std::log(std::abs(factor));
    }
    rates[p] = acc / T;
  });
  out.exponent = stats::mean(rates);
  out.se = std::sqrt(stats::variance(rates) / static_cast<double>(rates.size()));
  return out;
}

StabilityReport run_stability(const std::function<AmplitudeSDE(double)>& sde_for, const std::vector<double>& nu_grid,
                              const LyapunovConfig& config) {
  if (nu_grid.size() < 2) throw Error(ErrorCode::Config, "nu_grid needs at least two values");
  for (std::size_t i = 1; i < nu_grid.size(); ++i) {
    if (!(nu_grid[i] > nu_grid[i - 1])) throw Error(ErrorCode::Config, "nu_grid must be strictly increasing");
  }
  StabilityReport report;
  report.nu_grid = nu_grid;
  std::vector<double> est;
  std::vector<double> closed;
  double mean_se = 0.0;
  for (const double nu : nu_grid) {
    report.estimates.push_back(estimate_lyapunov(sde_for(nu), config));
    est.push_back(report.estimates.back().exponent);
    closed.push_back(report.estimates.back().closed_form);
    mean_se += report.estimates.back().se / static_cast<double>(nu_grid.size());
  }
  for (std::size_t i = 1; i < est.size(); ++i) {
    if (!(est[i] > est[i - 1])) report.monotone = false;
  }
  const auto fit = stats::ols(nu_grid, est);
  const auto fit_closed = stats::ols(nu_grid, closed);
  if (fit.slope == 0.0 || fit_closed.slope == 0.0) {
    throw Error(ErrorCode::Precondition, "exponent does not depend on nu; no threshold");
  }
  report.threshold_estimate = -fit.intercept / fit.slope;
  report.threshold_se = mean_se / std::abs(fit.slope);
  report.threshold_closed_form = -fit_closed.intercept / fit_closed.slope;
  return report;
}

OuVarianceReport ou_variance_test(const ModelSpec& model, const SimConfig& config, std::size_t n_samples) {
  config.validate();
  if (n_samples < 2) throw Error(ErrorCode::Config, "OU variance test needs at least two samples");
  bool any = false;
  for (std::size_t k = model.n_kernel(); k < model.n_channels(); ++k) any = any || model.alpha(k) != 0.0;
  if (!any) throw Error(ErrorCode::Precondition, "no stable mode carries additive noise");

  const double eps = config.epsilon;
  const double dT = eps * eps;
  constexpr std::size_t kBurnIn = 64;
  const NoiseSource noise = NoiseSource::slow_only(config.seed, dT, kOuChainStream);
  OuVarianceReport report;
  report.epsilon = eps;
  report.n_samples = n_samples;
  for (std::size_t k = model.n_kernel(); k < model.n_channels(); ++k) {
    const double lam = model.lambda(k);
    const double alpha = model.alpha(k);
    std::vector<double> xi(kBurnIn + n_samples);
    noise.fill_standard_normals(0, k, 0, xi.size(), xi.data());
    std::vector<double> samples(n_samples);
    double z = 0.0;
    for (std::size_t s = 0; s < xi.size(); ++s) {
      z = ou_exact_step(z, lam, alpha, eps, dT, xi[s]);
      if (s >= kBurnIn) samples[s - kBurnIn] = z;
    }
    OuModeStats m;
    m.mode = k;
    m.expected = alpha * alpha / (2.0 * lam);
    m.variance = stats::variance(samples);
    m.mean = stats::mean(samples);
    const double nn = static_cast<double>(n_samples);
    m.se = m.expected * std::sqrt(2.0 / (nn - 1.0));
    m.mean_se = std::sqrt(m.expected / nn);
    m.within_3se = std::abs(m.variance - m.expected) <= 3.0 * m.se && std::abs(m.mean) <= 3.0 * m.mean_se;
    report.modes.push_back(m);
  }
  return report;
}

MomentReport moment_compare_case2(const ModelSpec& model, const SimConfig& config, const std::vector<double>& eps_grid,
                                  const ErrorScalingSetup& setup) {
  require_eps_grid(eps_grid);
  require_scaling(model, ReductionCase::II);
  const Case2Spec spec = derive_case2(model);
  const std::optional<AmplitudeSDE> scalar = scalar_case2(model);
  MomentReport report;
  report.eps_grid = eps_grid;
  for (const double eps : eps_grid) {
    SimConfig cfg = config;
    cfg.epsilon = eps;
    cfg.validate();
    EpsilonResult r = case2_epsilon(model, cfg, setup, spec, scalar, 16.0 / 15.0 - 13.0 * config.kappa);
    if (r.law->full_samples < 2) report.warnings.push_back("insufficient unstopped paths at eps = " + std::to_string(eps));
    report.per_eps.push_back(*r.law);
  }
  report.ks_decreasing = true;
  for (std::size_t i = 1; i < report.per_eps.size(); ++i) {
    if (!(report.per_eps[i].ks < report.per_eps[i - 1].ks)) report.ks_decreasing = false;
  }
  return report;
}

}  // namespace ampeq
