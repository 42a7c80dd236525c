#include "ampeq/noise.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ampeq/error.hpp"

namespace ampeq {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 53-bit uniform in (0, 1].
double to_unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53; }

struct NormalPair {
  double even;
  double odd;
};

NormalPair box_muller(std::uint64_t key) {
  const double u1 = to_unit_open(splitmix64(key));
  const double u2 = to_unit_open(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::uint64_t pair_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t path, std::uint64_t channel,
                       std::uint64_t pair) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ channel);
  return splitmix64(h ^ pair);
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, double epsilon, std::size_t substeps, double dt_fast,
                         std::uint64_t stream)
    : seed_(seed), stream_(stream), epsilon_(epsilon), substeps_(substeps), dt_fast_(dt_fast) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::Config, "noise epsilon must be positive");
  if (substeps == 0) throw Error(ErrorCode::Config, "noise needs at least one substep");
  if (!(dt_fast > 0.0) || !std::isfinite(dt_fast)) throw Error(ErrorCode::Config, "noise step must be positive");
  sqrt_dt_fast_ = std::sqrt(dt_fast);
}

NoiseSource NoiseSource::slow_only(std::uint64_t seed, double dt_slow, std::uint64_t stream) {
  return NoiseSource(seed, 1.0, 1, dt_slow, stream);
}

double NoiseSource::standard_normal(std::size_t path, std::size_t channel, std::uint64_t step) const {
  const NormalPair p = box_muller(pair_key(seed_, stream_, path, channel, step >> 1));
  return (step & 1U) ? p.odd : p.even;
}

void NoiseSource::fill_standard_normals(std::size_t path, std::size_t channel, std::uint64_t first,
                                        std::size_t count, double* out) const {
  std::size_t r = 0;
  std::uint64_t step = first;
  if (count > 0 && (step & 1U)) {
    out[r++] = standard_normal(path, channel, step++);
  }
  while (r + 1 < count) {
    const NormalPair p = box_muller(pair_key(seed_, stream_, path, channel, step >> 1));
    out[r++] = p.even;
    out[r++] = p.odd;
    step += 2;
  }
  if (r < count) out[r] = standard_normal(path, channel, step);
}

double NoiseSource::fast_increment(std::size_t path, std::size_t channel, std::uint64_t fast_step) const {
  return sqrt_dt_fast_ * standard_normal(path, channel, fast_step);
}

void NoiseSource::fill_fast_increments(std::size_t path, std::size_t channel, std::uint64_t slow_step,
                                       double* out) const {
  fill_standard_normals(path, channel, slow_step * substeps_, substeps_, out);
  for (std::size_t r = 0; r < substeps_; ++r) out[r] *= sqrt_dt_fast_;
}

double NoiseSource::slow_increment(std::size_t path, std::size_t channel, std::uint64_t slow_step) const {
  std::vector<double> buf(substeps_);
  fill_fast_increments(path, channel, slow_step, buf.data());
  double acc = 0.0;
  for (const double dw : buf) acc += dw;
  return epsilon_ * acc;
}

}  // namespace ampeq
