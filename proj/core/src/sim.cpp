#include "ampeq/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "ampeq/error.hpp"

namespace ampeq {

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::Config, what); };
  if (!(epsilon > 0.0 && epsilon <= 0.5)) fail("epsilon must lie in (0, 0.5]");
  if (!(T0 > 0.0) || !std::isfinite(T0)) fail("T0 must be positive");
  if (!(dt_slow > 0.0) || dt_slow > T0) fail("dt_slow must lie in (0, T0]");
  if (!(dt_fast_factor > 0.0 && dt_fast_factor <= 2.0)) fail("dt_fast_factor must lie in (0, 2]");
  if (!(kappa > 0.0 && kappa < 2.0 / 19.0)) fail("kappa must lie in (0, 2/19)");
  if (n_paths == 0) fail("n_paths must be positive");
  if (!(guard_scale > 0.0) || !std::isfinite(guard_scale)) fail("guard_scale must be positive");
  n_slow_steps();
}

std::size_t SimConfig::n_slow_steps() const {
  const double ratio = T0 / dt_slow;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * steps) {
    throw Error(ErrorCode::Config, "T0 must be an integer multiple of dt_slow");
  }
  return static_cast<std::size_t>(steps);
}

FastGrid fast_grid(const ModelSpec& model, const SimConfig& config) {
  const double lam_max = model.lambdas().maxCoeff();
  const double span = config.dt_slow / (config.epsilon * config.epsilon);
  FastGrid g;
  g.substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span * lam_max / config.dt_fast_factor - 1e-9)));
  g.dt_fast = span / static_cast<double>(g.substeps);
  return g;
}

NoiseSource make_noise(const ModelSpec& model, const SimConfig& config, std::uint64_t stream) {
  const FastGrid g = fast_grid(model, config);
  return NoiseSource(config.seed, config.epsilon, g.substeps, g.dt_fast, stream);
}

namespace {

void require_noise_grid(const SimConfig& config, const NoiseSource& noise) {
  if (std::abs(noise.dt_slow() - config.dt_slow) > 1e-9 * config.dt_slow) {
    throw Error(ErrorCode::Alignment, "noise source slow step does not match dt_slow");
  }
}

void require_finite(const Eigen::VectorXd& v, double T) {
  if (!v.allFinite()) throw Error(ErrorCode::Integration, "non-finite state at T = " + std::to_string(T));
}

}  // namespace

Trajectory simulate_spde(const ModelSpec& model, const SimConfig& config, const NoiseSource& noise,
                         std::size_t path, const SpectralField& u0) {
  config.validate();
  require_noise_grid(config, noise);
  if (std::abs(noise.epsilon() - config.epsilon) > 1e-15) {
    throw Error(ErrorCode::Alignment, "noise source epsilon does not match the configuration");
  }
  if (u0.size() != model.n_modes()) throw Error(ErrorCode::Dimension, "initial field has the wrong size");
  const double eps = config.epsilon;
  if (h_alpha_norm(model, u0) > std::pow(eps, 1.0 - config.kappa / 3.0) * (1.0 + 1e-12)) {
    throw Error(ErrorCode::Precondition, "initial condition exceeds eps^{1 - kappa/3} in the H^alpha norm");
  }

  const auto nm = static_cast<Eigen::Index>(model.n_modes());
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  const std::size_t m = noise.substeps();
  const double dt = noise.dt_fast();
  const double sigma_eps = model.scaling() == NoiseScaling::AdditiveEps2 ? eps * eps : eps;
  const double eps2 = eps * eps;

  Eigen::VectorXd decay(nm);
  for (Eigen::Index k = 0; k < nm; ++k) decay[k] = std::exp(-model.lambda(static_cast<std::size_t>(k)) * dt);
  const Eigen::MatrixXd& L = model.linear();
  const bool l_diagonal = L.isDiagonal(0.0);
  const Eigen::VectorXd l_diag = L.diagonal();

  struct Channel {
    std::size_t index;
    double additive;
    bool has_mult;
  };
  std::vector<Channel> channels;
  for (std::size_t j = 0; j < model.n_channels(); ++j) {
    const bool mult = !model.multiplicative(j).isZero(0.0);
    if (model.alpha(j) != 0.0 || mult) channels.push_back({j, sigma_eps * model.alpha(j), mult});
  }

  // Guard thresholds on the rescaled kernel and stable parts.
  const bool case1 = model.scaling() == NoiseScaling::AdditiveEps2;
  const double kernel_scale = 1.0 / eps;
  const double stable_scale = case1 ? 1.0 / eps2 : 1.0 / eps;
  const double kernel_limit = config.guard_scale * std::pow(eps, -config.kappa);
  const double stable_limit = config.guard_scale * std::pow(eps, case1 ? -3.0 * config.kappa : -config.kappa);
  Eigen::VectorXd weights(nm);
  for (Eigen::Index k = 0; k < nm; ++k) {
    weights[k] = std::pow(model.lambda(static_cast<std::size_t>(k)) + 1.0, model.norm_index());
  }
  auto guard_fires = [&](const Eigen::VectorXd& u) {
    const double a = std::sqrt((u.head(n).array().square() * weights.head(n).array()).sum()) * kernel_scale;
    const double b = std::sqrt((u.tail(nm - n).array().square() * weights.tail(nm - n).array()).sum()) * stable_scale;
    return a > kernel_limit || b > stable_limit;
  };

  const std::size_t n_steps = config.n_slow_steps();
  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  Eigen::VectorXd u = u0.coeffs;
  traj.times.push_back(0.0);
  traj.states.push_back(u);
  if (guard_fires(u)) {
    traj.stopped_at = 0.0;
    return traj;
  }

  std::vector<std::vector<double>> dw(channels.size(), std::vector<double>(m));
  Eigen::VectorXd quad(nm);
  Eigen::VectorXd v(nm);
  Eigen::VectorXd gu(nm);
  for (std::size_t s = 0; s < n_steps; ++s) {
    for (std::size_t c = 0; c < channels.size(); ++c) noise.fill_fast_increments(path, channels[c].index, s, dw[c].data());
    for (std::size_t r = 0; r < m; ++r) {
      model.apply_quadratic(u, quad);
      if (l_diagonal) {
        v.array() = u.array() + dt * (eps2 * l_diag.array() * u.array() + quad.array());
      } else {
        v.noalias() = u + dt * (eps2 * (L * u) + quad);
      }
      for (std::size_t c = 0; c < channels.size(); ++c) {
        const double w = dw[c][r];
        v[static_cast<Eigen::Index>(channels[c].index)] += channels[c].additive * w;
        if (channels[c].has_mult) {
          gu.noalias() = model.multiplicative(channels[c].index) * u;
          v += (eps * w) * gu;
        }
      }
      u.array() = decay.array() * v.array();
    }
    const double T = static_cast<double>(s + 1) * config.dt_slow;
    require_finite(u, T);
    traj.times.push_back(T);
    traj.states.push_back(u);
    if (guard_fires(u)) {
      traj.stopped_at = T;
      break;
    }
  }
  return traj;
}

namespace {

// step(x, r, db, dT) advances x in place by one Euler-Maruyama substep.
template <typename Step>
Trajectory euler_maruyama(std::size_t dim, std::size_t n_channels, Step&& step, const SimConfig& config,
                          const NoiseSource& noise, std::size_t path, const Eigen::VectorXd& x0,
                          AmplitudeOptions options) {
  config.validate();
  require_noise_grid(config, noise);
  if (static_cast<std::size_t>(x0.size()) != dim) {
    throw Error(ErrorCode::Dimension, "initial amplitude has the wrong dimension");
  }
  const std::size_t n_steps = config.n_slow_steps();
  const std::size_t m = options.fine_grid ? noise.substeps() : 1;
  const double dT = config.dt_slow / static_cast<double>(m);
  const double limit = config.guard_scale * std::pow(config.epsilon, -config.kappa);

  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  Eigen::VectorXd x = x0;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  if (options.guard && x.norm() > limit) {
    traj.stopped_at = 0.0;
    return traj;
  }
  std::vector<std::vector<double>> db(n_channels, std::vector<double>(m));
  for (std::size_t s = 0; s < n_steps; ++s) {
    for (std::size_t j = 0; j < n_channels; ++j) {
      if (options.fine_grid) {
        noise.fill_fast_increments(path, j, s, db[j].data());
        for (double& w : db[j]) w *= noise.epsilon();
      } else {
        db[j][0] = noise.slow_increment(path, j, s);
      }
    }
    for (std::size_t r = 0; r < m; ++r) step(x, r, db, dT);
    const double T = static_cast<double>(s + 1) * config.dt_slow;
    require_finite(x, T);
    traj.times.push_back(T);
    traj.states.push_back(x);
    if (options.guard && x.norm() > limit) {
      traj.stopped_at = T;
      break;
    }
  }
  return traj;
}

}  // namespace

Trajectory simulate_amplitude(const AmplitudeSDE& sde, const SimConfig& config, const NoiseSource& noise,
                              std::size_t path, const Eigen::VectorXd& x0, AmplitudeOptions options) {
  const std::size_t nc = sde.n_channels();
  if (sde.dim == 1) {
    const double lin = sde.drift_lin(0, 0);
    const double cub = sde.drift_cubic[0];
    std::vector<double> add(nc);
    std::vector<double> mult(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      add[j] = sde.diff_add[j][0];
      mult[j] = sde.diff_mult[j](0, 0);
    }
    return euler_maruyama(
        1, nc,
        [&](Eigen::VectorXd& xv, std::size_t r, const std::vector<std::vector<double>>& db, double dT) {
          const double x = xv[0];
          double next = x + dT * (lin * x + cub * x * x * x);
          for (std::size_t j = 0; j < nc; ++j) next += (add[j] + mult[j] * x) * db[j][r];
          xv[0] = next;
        },
        config, noise, path, x0, options);
  }
  return euler_maruyama(
      sde.dim, nc,
      [&](Eigen::VectorXd& x, std::size_t r, const std::vector<std::vector<double>>& db, double dT) {
        Eigen::VectorXd next = x + dT * sde.drift(x);
        for (std::size_t j = 0; j < nc; ++j) next += db[j][r] * sde.diffusion(j, x);
        x = std::move(next);
      },
      config, noise, path, x0, options);
}

Trajectory simulate_sigma_form(const Case2Spec& spec, const SimConfig& config, const NoiseSource& noise,
                               std::size_t path, const Eigen::VectorXd& y0, AmplitudeOptions options) {
  AmplitudeSDE drift;
  drift.dim = spec.dim;
  drift.drift_lin = spec.lbar;
  drift.drift_cubic = spec.drift_cubic;
  const auto n = static_cast<Eigen::Index>(spec.dim);
  return euler_maruyama(
      spec.dim, spec.dim,
      [&](Eigen::VectorXd& y, std::size_t r, const std::vector<std::vector<double>>& db, double dT) {
        const Eigen::MatrixXd root = spd_sqrt(spec.sigma_form(y));
        Eigen::VectorXd dw(n);
        for (Eigen::Index j = 0; j < n; ++j) dw[j] = db[static_cast<std::size_t>(j)][r];
        Eigen::VectorXd next = y + dT * drift.drift(y) + root * dw;
        y = std::move(next);
      },
      config, noise, path, y0, options);
}

double ou_exact_step(double z, double lambda, double alpha, double epsilon, double dT, double xi) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::Domain, "OU rate must be positive");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::Domain, "epsilon must be positive");
  if (!(dT >= 0.0)) throw Error(ErrorCode::Domain, "OU step must be nonnegative");
  const double rate = lambda * dT / (epsilon * epsilon);
  const double decay = std::exp(-rate);
  return decay * z + alpha * std::sqrt(-std::expm1(-2.0 * rate) / (2.0 * lambda)) * xi;
}

Trajectory simulate_ou_modes(const ModelSpec& model, const SimConfig& config, const NoiseSource& noise,
                             std::size_t path) {
  config.validate();
  require_noise_grid(config, noise);
  const auto nm = static_cast<Eigen::Index>(model.n_modes());
  const std::size_t m = noise.substeps();
  const double dt = noise.dt_fast();
  std::vector<std::size_t> active;
  for (std::size_t k = model.n_kernel(); k < model.n_channels(); ++k) {
    if (model.alpha(k) != 0.0) active.push_back(k);
  }
  const std::size_t n_steps = config.n_slow_steps();
  Trajectory traj;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nm);
  traj.times.push_back(0.0);
  traj.states.push_back(z);
  std::vector<double> dw(m);
  for (std::size_t s = 0; s < n_steps; ++s) {
    for (const std::size_t k : active) {
      const double decay = std::exp(-model.lambda(k) * dt);
      const double alpha = model.alpha(k);
      noise.fill_fast_increments(path, k, s, dw.data());
      double zk = z[static_cast<Eigen::Index>(k)];
      for (std::size_t r = 0; r < m; ++r) zk = decay * (zk + alpha * dw[r]);
      z[static_cast<Eigen::Index>(k)] = zk;
    }
    traj.times.push_back(static_cast<double>(s + 1) * config.dt_slow);
    traj.states.push_back(z);
  }
  return traj;
}

Trajectory build_case2_approximation(const ModelSpec& model, const Trajectory& y_path, const SpectralField& psi0,
                                     const Trajectory& z_path, double epsilon) {
  if (psi0.size() != model.n_modes()) throw Error(ErrorCode::Dimension, "psi0 has the wrong size");
  const std::size_t len = std::min(y_path.size(), z_path.size());
  if (len == 0) throw Error(ErrorCode::Alignment, "empty trajectory");
  for (std::size_t i = 0; i < len; ++i) {
    if (std::abs(y_path.times[i] - z_path.times[i]) > 1e-12 * std::max(1.0, std::abs(y_path.times[i]))) {
      throw Error(ErrorCode::Alignment, "reduced and OU paths are sampled on different grids");
    }
  }
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  Trajectory out;
  out.stopped_at = y_path.stopped_at;
  for (std::size_t i = 0; i < len; ++i) {
    const double T = y_path.times[i];
    if (y_path.states[i].size() != n) throw Error(ErrorCode::Dimension, "reduced path has the wrong dimension");
    Eigen::VectorXd u = semigroup_step(model, psi0, T / (epsilon * epsilon)).coeffs + z_path.states[i];
    u.head(n) += y_path.states[i];
    out.times.push_back(T);
    out.states.push_back(epsilon * u);
  }
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t hw = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min(hw, n);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ampeq
