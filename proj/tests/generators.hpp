#pragma once

// Randomised instance generators for the property suites.

#include <cstdint>
#include <random>
#include <vector>

#include "ampeq/spectral.hpp"

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  std::uint64_t bits() { return rng_(); }

  Eigen::VectorXd vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

struct ModelShape {
  bool degenerate_noise = false;  ///< alpha_j = 0 on kernel channels, B_kkm = 0 for stable k
};

// Random sparse model satisfying the kernel-annihilation assumption.
inline ampeq::ModelSpec model(Source& s, ModelShape shape = {}) {
  ampeq::ModelData d;
  const int n = s.integer(1, 3);
  const int nm = n + s.integer(1, 6);
  d.n_kernel = static_cast<std::size_t>(n);
  d.lambdas = Eigen::VectorXd::Zero(nm);
  double lam = 0.0;
  for (int k = n; k < nm; ++k) {
    lam += s.uniform(0.2, 4.0);
    d.lambdas[k] = lam;
  }
  d.linear = Eigen::MatrixXd::Zero(nm, nm);
  d.linear.topLeftCorner(n, n) = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return s.normal(); });
  d.linear.bottomRightCorner(nm - n, nm - n) =
      Eigen::MatrixXd::NullaryExpr(nm - n, nm - n, [&] { return s.normal(); });
  for (int i = 0; i < nm; ++i) {
    for (int j = i; j < nm; ++j) {
      for (int k = 0; k < nm; ++k) {
        if (i < n && j < n && k < n) continue;
        if (shape.degenerate_noise && i == j && i >= n && k < n) continue;
        if (!s.coin(0.4)) continue;
        d.bilinear.push_back({i, j, k, s.normal()});
      }
    }
  }
  const int channels = s.integer(1, nm);
  d.noise_amplitudes = Eigen::VectorXd::Zero(channels);
  for (int j = 0; j < channels; ++j) {
    if (shape.degenerate_noise && j < n) continue;
    d.noise_amplitudes[j] = s.coin(0.8) ? s.uniform(-1.5, 1.5) : 0.0;
  }
  for (int j = 0; j < channels; ++j) {
    d.multiplicative.push_back(Eigen::MatrixXd::NullaryExpr(nm, nm, [&] { return s.coin(0.5) ? s.normal() : 0.0; }));
  }
  d.norm_index = s.uniform(0.0, 1.0);
  d.scaling = shape.degenerate_noise ? ampeq::NoiseScaling::AdditiveEps1 : ampeq::NoiseScaling::AdditiveEps2;
  return ampeq::ModelSpec(std::move(d));
}

}  // namespace gen
