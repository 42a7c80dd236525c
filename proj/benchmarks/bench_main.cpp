#include <benchmark/benchmark.h>

#include "ampeq/amplitude.hpp"
#include "ampeq/burgers.hpp"
#include "ampeq/sim.hpp"

using namespace ampeq;

namespace {

ModelSpec burgers(std::size_t modes, NoiseScaling s = NoiseScaling::AdditiveEps2) {
  BurgersParams p;
  p.nu = 0.5;
  p.alphas = {s == NoiseScaling::AdditiveEps2 ? 0.3 : 0.0, 0.0, 0.5};
  p.n_modes = modes;
  p.scaling = s;
  return build_burgers_model(p);
}

void BM_EvalB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelSpec m = burgers(n);
  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), 1.0, 0.01);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (auto _ : state) {
    m.apply_quadratic(u, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["entries"] = static_cast<double>(m.bilinear().size());
}
BENCHMARK(BM_EvalB)->Arg(16)->Arg(32)->Arg(64);

// One slow step of the full SPDE, i.e. `substeps` exponential Euler steps.
void BM_SpdeStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelSpec m = burgers(n);
  SimConfig c;
  c.epsilon = 0.1;
  c.T0 = 0.01;
  c.dt_slow = 1e-3;
  c.dt_fast_factor = 2.0;
  const NoiseSource noise = make_noise(m, c);
  SpectralField u0 = SpectralField::zero(n);
  u0.coeffs[0] = 0.03;
  std::size_t path = 0;
  for (auto _ : state) {
    const Trajectory t = simulate_spde(m, c, noise, path++, u0);
    benchmark::DoNotOptimize(t.states.back().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.n_slow_steps()));
  state.counters["substeps"] = static_cast<double>(fast_grid(m, c).substeps);
}
BENCHMARK(BM_SpdeStep)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_DeriveCase2(benchmark::State& state) {
  const ModelSpec m = burgers(static_cast<std::size_t>(state.range(0)), NoiseScaling::AdditiveEps1);
  for (auto _ : state) {
    const Case2Spec spec = derive_case2(m);
    benchmark::DoNotOptimize(spec.lbar.data());
  }
}
BENCHMARK(BM_DeriveCase2)->Arg(8)->Arg(32);

void BM_OuStep(benchmark::State& state) {
  double z = 0.0;
  double xi = 0.3;
  for (auto _ : state) {
    z = ou_exact_step(z, 8.0, 1.0, 0.1, 0.01, xi);
    xi = -xi;
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_OuStep);

}  // namespace

BENCHMARK_MAIN();
