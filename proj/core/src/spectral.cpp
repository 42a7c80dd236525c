#include "ampeq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "ampeq/error.hpp"

namespace ampeq {
namespace {

void require_size(const ModelSpec& model, const SpectralField& f, const char* what) {
  if (f.size() != model.n_modes()) {
    throw Error(ErrorCode::Dimension, std::string(what) + ": field has " + std::to_string(f.size()) +
                                          " modes, model has " + std::to_string(model.n_modes()));
  }
}

void require_kernel_size(const ModelSpec& model, const KernelVector& a, const char* what) {
  if (a.size() != model.n_kernel()) {
    throw Error(ErrorCode::Dimension, std::string(what) + ": kernel vector has " + std::to_string(a.size()) +
                                          " entries, kernel dimension is " + std::to_string(model.n_kernel()));
  }
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

ModelSpec::ModelSpec(ModelData data)
    : n_kernel_(data.n_kernel),
      lambdas_(std::move(data.lambdas)),
      linear_(std::move(data.linear)),
      alphas_(std::move(data.noise_amplitudes)),
      gprime_(std::move(data.multiplicative)),
      norm_index_(data.norm_index),
      scaling_(data.scaling) {
  const auto n_modes = static_cast<std::size_t>(lambdas_.size());
  const auto nm = static_cast<Eigen::Index>(n_modes);
  if (n_kernel_ < 1 || n_kernel_ >= n_modes) {
    throw Error(ErrorCode::InvalidModel, "need 1 <= n_kernel < n_modes");
  }
  if (!lambdas_.allFinite()) throw Error(ErrorCode::InvalidModel, "non-finite eigenvalue");
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double lam = lambdas_[static_cast<Eigen::Index>(k)];
    if (k < n_kernel_ && lam != 0.0) {
      throw Error(ErrorCode::InvalidModel, "kernel eigenvalue " + std::to_string(k + 1) + " is not zero");
    }
    if (k >= n_kernel_ && !(lam > 0.0)) {
      throw Error(ErrorCode::InvalidModel,
                  "stable eigenvalue " + std::to_string(k + 1) + " must be positive (A_s must be invertible)");
    }
    if (k > 0 && lam < lambdas_[static_cast<Eigen::Index>(k - 1)]) {
      throw Error(ErrorCode::InvalidModel, "eigenvalues must be nondecreasing");
    }
  }
  if (linear_.rows() != nm || linear_.cols() != nm) {
    throw Error(ErrorCode::InvalidModel, "linear drift must be n_modes x n_modes");
  }
  if (!linear_.allFinite()) throw Error(ErrorCode::InvalidModel, "non-finite linear drift");
  if (static_cast<std::size_t>(alphas_.size()) > n_modes) {
    throw Error(ErrorCode::InvalidModel, "more noise channels than modes");
  }
  if (!alphas_.allFinite()) throw Error(ErrorCode::InvalidModel, "non-finite noise amplitude");
  if (gprime_.size() != static_cast<std::size_t>(alphas_.size())) {
    throw Error(ErrorCode::InvalidModel, "one multiplicative coupling matrix per noise channel required");
  }
  for (const auto& m : gprime_) {
    if (m.rows() != nm || m.cols() != nm) {
      throw Error(ErrorCode::InvalidModel, "multiplicative coupling must be n_modes x n_modes per channel");
    }
    if (!m.allFinite()) throw Error(ErrorCode::InvalidModel, "non-finite multiplicative coupling");
  }
  if (!std::isfinite(norm_index_)) throw Error(ErrorCode::InvalidModel, "non-finite norm index");
  for (std::size_t j = 0; j < n_channels(); ++j) {
    if (alpha(j) != 0.0) noise_cutoff_ = j + 1;
  }

  std::map<std::tuple<int, int, int>, double> canon;
  for (const auto& e : data.bilinear) {
    const int n = static_cast<int>(n_modes);
    if (e.i < 0 || e.j < 0 || e.k < 0 || e.i >= n || e.j >= n || e.k >= n) {
      throw Error(ErrorCode::InvalidModel, "bilinear entry index out of range");
    }
    if (!std::isfinite(e.value)) throw Error(ErrorCode::InvalidModel, "non-finite bilinear entry");
    const auto key = std::make_tuple(std::min(e.i, e.j), std::max(e.i, e.j), e.k);
    auto [it, inserted] = canon.emplace(key, e.value);
    if (!inserted && !close(it->second, e.value)) {
      throw Error(ErrorCode::InvalidModel, "bilinear tensor is not symmetric in its first two indices");
    }
  }
  for (const auto& [key, value] : canon) {
    if (value == 0.0) continue;
    const auto [i, j, k] = key;
    entries_.push_back({i, j, k, value});
    if (i == j) {
      di_.push_back(i);
      dk_.push_back(k);
      dv_.push_back(value);
    } else {
      oi_.push_back(i);
      oj_.push_back(j);
      ok_.push_back(k);
      ov_.push_back(value);
    }
  }
}

double ModelSpec::b(std::size_t i, std::size_t j, std::size_t k) const {
  const int a = static_cast<int>(std::min(i, j));
  const int c = static_cast<int>(std::max(i, j));
  const int m = static_cast<int>(k);
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_tuple(a, c, m),
                                   [](const BilinearEntry& e, const std::tuple<int, int, int>& key) {
                                     return std::make_tuple(e.i, e.j, e.k) < key;
                                   });
  if (it != entries_.end() && it->i == a && it->j == c && it->k == m) return it->value;
  return 0.0;
}

bool ModelSpec::satisfies_kernel_annihilation(double tol) const {
  // B_c(a,a) = 0 for every kernel a iff B_{ijm} = 0 for kernel i, j, m (B symmetric).
  return std::none_of(entries_.begin(), entries_.end(), [&](const BilinearEntry& e) {
    return is_kernel(e.i) && is_kernel(e.j) && is_kernel(e.k) && std::abs(e.value) > tol;
  });
}

bool ModelSpec::satisfies_stable_diagonal_annihilation(double tol) const {
  return std::none_of(entries_.begin(), entries_.end(), [&](const BilinearEntry& e) {
    return e.i == e.j && !is_kernel(e.i) && is_kernel(e.k) && std::abs(e.value) > tol;
  });
}

void ModelSpec::apply_bilinear(const Eigen::Ref<const Eigen::VectorXd>& u,
                               const Eigen::Ref<const Eigen::VectorXd>& v,
                               Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  const std::size_t nd = dv_.size();
  for (std::size_t t = 0; t < nd; ++t) out[dk_[t]] += dv_[t] * u[di_[t]] * v[di_[t]];
  const std::size_t no = ov_.size();
  for (std::size_t t = 0; t < no; ++t) {
    out[ok_[t]] += ov_[t] * (u[oi_[t]] * v[oj_[t]] + u[oj_[t]] * v[oi_[t]]);
  }
}

void ModelSpec::apply_quadratic(const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  const std::size_t nd = dv_.size();
  for (std::size_t t = 0; t < nd; ++t) out[dk_[t]] += dv_[t] * u[di_[t]] * u[di_[t]];
  const std::size_t no = ov_.size();
  for (std::size_t t = 0; t < no; ++t) out[ok_[t]] += 2.0 * ov_[t] * u[oi_[t]] * u[oj_[t]];
}

SpectralField project(const ModelSpec& model, const SpectralField& field, Part part) {
  require_size(model, field, "project");
  SpectralField out = field;
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  if (part == Part::Kernel) {
    out.coeffs.tail(out.coeffs.size() - n).setZero();
  } else {
    out.coeffs.head(n).setZero();
  }
  return out;
}

double h_alpha_norm(const ModelSpec& model, const SpectralField& field, double alpha) {
  require_size(model, field, "h_alpha_norm");
  if (!field.coeffs.allFinite()) throw Error(ErrorCode::BlowUp, "non-finite coefficient in field");
  if (alpha == 0.0) return field.coeffs.norm();
  double acc = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    acc += field[k] * field[k] * std::pow(model.lambda(k) + 1.0, alpha);
  }
  return std::sqrt(acc);
}

SpectralField eval_B(const ModelSpec& model, const SpectralField& u, const SpectralField& v) {
  require_size(model, u, "eval_B");
  require_size(model, v, "eval_B");
  SpectralField out = SpectralField::zero(model.n_modes());
  model.apply_bilinear(u.coeffs, v.coeffs, out.coeffs);
  return out;
}

SpectralField apply_stable_inverse(const ModelSpec& model, const SpectralField& field) {
  require_size(model, field, "apply_stable_inverse");
  SpectralField out = SpectralField::zero(model.n_modes());
  for (std::size_t k = model.n_kernel(); k < model.n_modes(); ++k) {
    const double lam = model.lambda(k);
    if (lam == 0.0) throw Error(ErrorCode::SingularOperator, "zero eigenvalue on a stable mode");
    out[k] = -field[k] / lam;
  }
  return out;
}

namespace {

// -B_c(u, A_s^{-1} B_s(v, w)), symmetric in (v, w) only.
KernelVector f_unsymmetrised(const ModelSpec& model, const SpectralField& u, const SpectralField& v,
                             const SpectralField& w) {
  const SpectralField inner = apply_stable_inverse(model, eval_B(model, v, w));
  const SpectralField outer = eval_B(model, u, inner);
  return KernelVector(-outer.coeffs.head(static_cast<Eigen::Index>(model.n_kernel())));
}

}  // namespace

KernelVector eval_F(const ModelSpec& model, const KernelVector& u, const KernelVector& v, const KernelVector& w) {
  require_kernel_size(model, u, "eval_F");
  require_kernel_size(model, v, "eval_F");
  require_kernel_size(model, w, "eval_F");
  const SpectralField eu = embed(model, u);
  const SpectralField ev = embed(model, v);
  const SpectralField ew = embed(model, w);
  // The inner pair is already symmetric, so averaging over the three choices
  // of outer argument gives the full symmetrisation over all 6 orderings.
  KernelVector out = f_unsymmetrised(model, eu, ev, ew);
  out.coeffs += f_unsymmetrised(model, ev, eu, ew).coeffs;
  out.coeffs += f_unsymmetrised(model, ew, eu, ev).coeffs;
  out.coeffs /= 3.0;
  return out;
}

SpectralField semigroup_step(const ModelSpec& model, const SpectralField& field, double t) {
  require_size(model, field, "semigroup_step");
  if (!(t >= 0.0)) throw Error(ErrorCode::Domain, "semigroup time must be nonnegative");
  SpectralField out = field;
  for (std::size_t k = model.n_kernel(); k < model.n_modes(); ++k) out[k] *= std::exp(-model.lambda(k) * t);
  return out;
}

SpectralField embed(const ModelSpec& model, const KernelVector& a) {
  require_kernel_size(model, a, "embed");
  SpectralField out = SpectralField::zero(model.n_modes());
  out.coeffs.head(a.coeffs.size()) = a.coeffs;
  return out;
}

KernelVector kernel_coords(const ModelSpec& model, const SpectralField& field) {
  require_size(model, field, "kernel_coords");
  return KernelVector(field.coeffs.head(static_cast<Eigen::Index>(model.n_kernel())));
}

}  // namespace ampeq
