#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ampeq/burgers.hpp"
#include "ampeq/error.hpp"
#include "ampeq/sim.hpp"
#include "ampeq/stats.hpp"
#include "ampeq/trajectory_io.hpp"

using namespace ampeq;

namespace {

ModelSpec burgers(double nu, double a1, double a3, std::size_t modes = 16,
                  NoiseScaling s = NoiseScaling::AdditiveEps2) {
  BurgersParams p;
  p.nu = nu;
  p.alphas = {a1, 0.0, a3};
  p.n_modes = modes;
  p.scaling = s;
  return build_burgers_model(p);
}

SimConfig small_config(double eps = 0.2) {
  SimConfig c;
  c.epsilon = eps;
  c.T0 = 0.1;
  c.dt_slow = 0.01;
  c.dt_fast_factor = 1.0;
  c.n_paths = 4;
  return c;
}

// B switched off, noise off.
ModelSpec linear_model() {
  ModelData d;
  d.n_kernel = 1;
  d.lambdas = Eigen::Vector4d(0.0, 3.0, 8.0, 15.0);
  d.linear = Eigen::Matrix4d::Zero();
  d.noise_amplitudes = Eigen::VectorXd::Zero(0);
  return ModelSpec(std::move(d));
}

}  // namespace

TEST_CASE("config validation and the fast grid") {
  SimConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.n_slow_steps() == 10);
  c.epsilon = 0.6;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.dt_fast_factor = 2.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.T0 = 0.105;
  CHECK_THROWS_AS(c.validate(), Error);

  const ModelSpec m = burgers(0.0, 0.0, 0.0);
  c = small_config(0.1);
  const FastGrid g = fast_grid(m, c);
  CHECK(g.dt_fast * m.lambdas().maxCoeff() <= c.dt_fast_factor * (1.0 + 1e-12));
  CHECK(static_cast<double>(g.substeps) * g.dt_fast == doctest::Approx(c.dt_slow / 0.01));
}

TEST_CASE("noise aggregation and determinism") {
  const NoiseSource n(42, 0.1, 7, 0.013);
  double acc = 0.0;
  for (std::uint64_t r = 0; r < 7; ++r) acc += n.fast_increment(3, 1, 5 * 7 + r);
  CHECK(n.slow_increment(3, 1, 5) == 0.1 * acc);
  const NoiseSource same(42, 0.1, 7, 0.013);
  CHECK(same.standard_normal(9, 2, 1001) == n.standard_normal(9, 2, 1001));
  CHECK(n.standard_normal(9, 2, 1001) != n.standard_normal(10, 2, 1001));
  const NoiseSource other(42, 0.1, 7, 0.013, 1);
  CHECK(other.standard_normal(9, 2, 1001) != n.standard_normal(9, 2, 1001));
  std::vector<double> buf(11);
  n.fill_standard_normals(1, 0, 3, buf.size(), buf.data());
  for (std::size_t r = 0; r < buf.size(); ++r) CHECK(buf[r] == n.standard_normal(1, 0, 3 + r));
}

TEST_CASE("SPDE trivial flows") {
  SimConfig c = small_config();
  const ModelSpec zero = burgers(0.0, 0.0, 0.0);
  const NoiseSource nz = make_noise(zero, c);
  const Trajectory t0 = simulate_spde(zero, c, nz, 0, SpectralField::zero(zero.n_modes()));
  for (const auto& s : t0.states) CHECK(s.cwiseAbs().maxCoeff() == 0.0);

  const ModelSpec lin = linear_model();
  const NoiseSource nl = make_noise(lin, c);
  const double delta = 1e-3;
  const Trajectory t1 = simulate_spde(lin, c, nl, 0, SpectralField::unit(4, 1) * delta);
  REQUIRE(t1.size() == 11);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    const double t = t1.times[i] / (c.epsilon * c.epsilon);
    CHECK(t1.states[i][1] == doctest::Approx(delta * std::exp(-3.0 * t)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(simulate_spde(lin, c, nl, 0, SpectralField::unit(4, 0)), Error);
}

TEST_CASE("SPDE guard and determinism") {
  SimConfig c = small_config(0.2);
  const ModelSpec m = burgers(0.5, 1.0, 1.0);
  const NoiseSource n = make_noise(m, c);
  SpectralField u0 = SpectralField::unit(m.n_modes(), 0) * (0.5 * c.epsilon);
  const Trajectory a = simulate_spde(m, c, n, 2, u0);
  const Trajectory b = simulate_spde(m, c, n, 2, u0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.states[i] == b.states[i]);
  c.guard_scale = 1e-3;
  const Trajectory g = simulate_spde(m, c, n, 2, u0);
  CHECK(g.stopped_at.has_value());
  CHECK(*g.stopped_at == 0.0);
}

TEST_CASE("amplitude EM examples") {
  SimConfig c;
  c.epsilon = 0.5;
  c.T0 = 20.0;
  c.dt_slow = 0.01;
  AmplitudeSDE ode;
  ode.dim = 1;
  ode.drift_lin = Eigen::MatrixXd::Constant(1, 1, 1.0);
  ode.drift_cubic = {-1.0};
  const NoiseSource n = NoiseSource::slow_only(1, c.dt_slow);
  AmplitudeOptions no_guard;
  no_guard.guard = false;
  const Trajectory t = simulate_amplitude(ode, c, n, 0, Eigen::VectorXd::Constant(1, 0.5), no_guard);
  CHECK(t.states.back()[0] == doctest::Approx(1.0).epsilon(1e-9));

  AmplitudeSDE bm;
  bm.dim = 1;
  bm.drift_lin = Eigen::MatrixXd::Zero(1, 1);
  bm.drift_cubic = {0.0};
  bm.diff_add = {Eigen::VectorXd::Constant(1, 0.7)};
  bm.diff_mult = {Eigen::MatrixXd::Zero(1, 1)};
  c.T0 = 1.0;
  c.dt_slow = 0.05;
  const NoiseSource nb = NoiseSource::slow_only(5, c.dt_slow);
  std::vector<double> finals;
  for (std::size_t p = 0; p < 20000; ++p) {
    finals.push_back(simulate_amplitude(bm, c, nb, p, Eigen::VectorXd::Zero(1), no_guard).states.back()[0]);
  }
  const double var = stats::variance(finals);
  CHECK(std::abs(var - 0.49) < 3.0 * 0.49 * std::sqrt(2.0 / 19999.0));
}

TEST_CASE("fine-grid EM uses the aggregated slow increments") {
  SimConfig c = small_config(0.2);
  AmplitudeSDE bm;
  bm.dim = 1;
  bm.drift_lin = Eigen::MatrixXd::Zero(1, 1);
  bm.drift_cubic = {0.0};
  bm.diff_add = {Eigen::VectorXd::Constant(1, 1.0)};
  bm.diff_mult = {Eigen::MatrixXd::Zero(1, 1)};
  const NoiseSource n(3, c.epsilon, 5, c.dt_slow / (5 * c.epsilon * c.epsilon));
  AmplitudeOptions fine;
  fine.fine_grid = true;
  fine.guard = false;
  AmplitudeOptions coarse;
  coarse.guard = false;
  const Trajectory a = simulate_amplitude(bm, c, n, 1, Eigen::VectorXd::Zero(1), fine);
  const Trajectory b = simulate_amplitude(bm, c, n, 1, Eigen::VectorXd::Zero(1), coarse);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.states[i][0] == doctest::Approx(b.states[i][0]).epsilon(1e-12));
}

TEST_CASE("exact OU step") {
  CHECK(ou_exact_step(2.0, 8.0, 0.0, 0.1, 0.01, 1.3) == doctest::Approx(2.0 * std::exp(-8.0)));
  CHECK(ou_exact_step(0.0, 8.0, 1.0, 0.1, 100.0, 1.0) == doctest::Approx(std::sqrt(1.0 / 16.0)));
  CHECK_THROWS_AS(ou_exact_step(0.0, 0.0, 1.0, 0.1, 0.1, 0.0), Error);
  CHECK_THROWS_AS(ou_exact_step(0.0, -1.0, 1.0, 0.1, 0.1, 0.0), Error);
}

TEST_CASE("case II approximation assembly") {
  const ModelSpec m = burgers(0.0, 0.0, 1.0, 8, NoiseScaling::AdditiveEps1);
  SimConfig c = small_config(0.1);
  Trajectory y;
  Trajectory z;
  for (std::size_t i = 0; i <= 10; ++i) {
    y.times.push_back(0.01 * static_cast<double>(i));
    y.states.push_back(Eigen::VectorXd::Constant(1, 0.3));
    z.times.push_back(0.01 * static_cast<double>(i));
    z.states.push_back(Eigen::VectorXd::Zero(8));
  }
  SpectralField psi = SpectralField::unit(8, 2) * 0.5;
  const Trajectory a = build_case2_approximation(m, y, psi, z, c.epsilon);
  CHECK(a.states[0][0] == doctest::Approx(0.03));
  CHECK(a.states[0][2] == doctest::Approx(0.05));
  CHECK(a.states[3][2] == doctest::Approx(0.05 * std::exp(-8.0 * 0.03 / 0.01)));
  const Trajectory pure = build_case2_approximation(m, y, SpectralField::zero(8), z, c.epsilon);
  CHECK(pure.states[5].tail(7).cwiseAbs().maxCoeff() == 0.0);
  z.times[4] += 1e-3;
  CHECK_THROWS_AS(build_case2_approximation(m, y, psi, z, c.epsilon), Error);
}

TEST_CASE("OU modes follow the fast increments") {
  const ModelSpec m = burgers(0.0, 0.0, 1.0, 8, NoiseScaling::AdditiveEps1);
  SimConfig c = small_config(0.2);
  const NoiseSource n = make_noise(m, c);
  const Trajectory z = simulate_ou_modes(m, c, n, 0);
  CHECK(z.size() == 11);
  CHECK(z.states.back()[0] == 0.0);
  CHECK(z.states.back()[1] == 0.0);
  CHECK(z.states.back()[2] != 0.0);
}

TEST_CASE("trajectory csv") {
  Trajectory t;
  t.times = {0.0, 0.5};
  t.states = {Eigen::Vector2d(1.0, 0.1), Eigen::Vector2d(2.0, -0.25)};
  std::ostringstream out;
  write_trajectory_csv(out, t, TrajectoryKind::Full, {{"seed", "4"}});
  CHECK(out.str() == "# seed: 4\nT,mode_1,mode_2\n0,1,0.1\n0.5,2,-0.25\n");
  Trajectory r;
  r.times = {0.0};
  r.states = {Eigen::VectorXd::Constant(1, 3.0)};
  std::ostringstream red;
  write_trajectory_csv(red, r, TrajectoryKind::Reduced);
  CHECK(red.str() == "T,y\n0,3\n");
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (const int h : hits) CHECK(h == 1);
  CHECK_THROWS(parallel_for(5, [](std::size_t i) {
    if (i == 3) throw std::runtime_error("x");
  }));
}
