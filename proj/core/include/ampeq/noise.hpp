#pragma once

// Counter-based Gaussian increments addressable by (path, channel, step).
// Original-time increments dW_k over one fast step of length dt_fast, and
// slow-time increments d(beta~_k) = eps * (sum of the fast increments over one
// slow step), so the reduced and full simulations see the same Brownian path.

#include <cstddef>
#include <cstdint>

namespace ampeq {

class NoiseSource {
 public:
  /// `stream` selects an independent family of Brownian motions for the same seed.
  NoiseSource(std::uint64_t seed, double epsilon, std::size_t substeps, double dt_fast, std::uint64_t stream = 0);

  /// Slow-time-only source: one substep of length dt_slow, eps = 1.
  static NoiseSource slow_only(std::uint64_t seed, double dt_slow, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  double epsilon() const { return epsilon_; }
  std::size_t substeps() const { return substeps_; }
  double dt_fast() const { return dt_fast_; }
  double dt_slow() const { return epsilon_ * epsilon_ * dt_fast_ * static_cast<double>(substeps_); }

  double standard_normal(std::size_t path, std::size_t channel, std::uint64_t step) const;
  /// out[r] = standard_normal(path, channel, first + r), r < count.
  void fill_standard_normals(std::size_t path, std::size_t channel, std::uint64_t first, std::size_t count,
                             double* out) const;

  double fast_increment(std::size_t path, std::size_t channel, std::uint64_t fast_step) const;
  /// out[r] = fast_increment(path, channel, slow_step * substeps + r), r < substeps.
  void fill_fast_increments(std::size_t path, std::size_t channel, std::uint64_t slow_step, double* out) const;
  /// eps * sum_{r < substeps} fast_increment(slow_step * substeps + r), summed in order.
  double slow_increment(std::size_t path, std::size_t channel, std::uint64_t slow_step) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  double epsilon_;
  std::size_t substeps_;
  double dt_fast_;
  double sqrt_dt_fast_;
};

}  // namespace ampeq
