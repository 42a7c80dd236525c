#include "ampeq/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ampeq/error.hpp"

namespace ampeq {

Eigen::VectorXd AmplitudeSDE::drift(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = drift_lin * x;
  for (std::size_t m = 0; m < dim; ++m) {
    double acc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) {
        const double xab = x[static_cast<Eigen::Index>(a)] * x[static_cast<Eigen::Index>(b)];
        for (std::size_t c = 0; c < dim; ++c) acc += cubic(m, a, b, c) * xab * x[static_cast<Eigen::Index>(c)];
      }
    }
    out[static_cast<Eigen::Index>(m)] += acc;
  }
  return out;
}

Eigen::VectorXd AmplitudeSDE::diffusion(std::size_t channel, const Eigen::VectorXd& x) const {
  return diff_add[channel] + diff_mult[channel] * x;
}

bool AmplitudeSDE::all_finite() const {
  if (!drift_lin.allFinite()) return false;
  if (!std::all_of(drift_cubic.begin(), drift_cubic.end(), [](double v) { return std::isfinite(v); })) return false;
  for (const auto& v : diff_add) {
    if (!v.allFinite()) return false;
  }
  for (const auto& m : diff_mult) {
    if (!m.allFinite()) return false;
  }
  return true;
}

Eigen::MatrixXd SigmaForm::operator()(const Eigen::VectorXd& phi) const {
  const Eigen::Index n = phi.size();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (const auto& v : linear_factors) {
    const Eigen::VectorXd vp = v * phi;
    s.noalias() += vp * vp.transpose();
  }
  for (std::size_t r = 0; r < constant_vectors.size(); ++r) {
    s.noalias() += constant_weights[r] * constant_vectors[r] * constant_vectors[r].transpose();
  }
  return s;
}

namespace {

// Small vector algebra on full coefficient vectors, shared by the derivations.
class Contractions {
 public:
  explicit Contractions(const ModelSpec& model)
      : model_(model), n_(static_cast<Eigen::Index>(model.n_kernel())), nm_(static_cast<Eigen::Index>(model.n_modes())) {}

  Eigen::VectorXd unit(Eigen::Index k) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nm_);
    e[k] = 1.0;
    return e;
  }
  Eigen::VectorXd B(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(nm_);
    model_.apply_bilinear(u, v, out);
    return out;
  }
  Eigen::VectorXd Pc(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = v;
    out.tail(nm_ - n_).setZero();
    return out;
  }
  Eigen::VectorXd Ps(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = v;
    out.head(n_).setZero();
    return out;
  }
  Eigen::VectorXd kernel(const Eigen::VectorXd& v) const { return v.head(n_); }
  // A_s^{-1} P_s: A e_k = -lambda_k e_k.
  Eigen::VectorXd As_inv(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nm_);
    for (Eigen::Index k = n_; k < nm_; ++k) out[k] = -v[k] / model_.lambda(static_cast<std::size_t>(k));
    return out;
  }
  // B_c (I (x)_s A_s)^{-1} (e_a (x)_s v) for stable a and the stable part of v.
  // On symmetric pairs e_a (x)_s e_k the operator I (x)_s A_s acts as
  // -(lambda_a + lambda_k)/2.
  Eigen::VectorXd Bc_pair_inverse(Eigen::Index a, const Eigen::VectorXd& v) const {
    const double la = model_.lambda(static_cast<std::size_t>(a));
    const Eigen::VectorXd ea = unit(a);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(nm_);
    for (Eigen::Index k = n_; k < nm_; ++k) {
      if (v[k] == 0.0) continue;
      const double lk = model_.lambda(static_cast<std::size_t>(k));
      const double scale = -2.0 / (la + lk);
      acc += (v[k] * scale) * B(ea, unit(k));
    }
    return Pc(acc);
  }
  // G'(0)(phi) f_j.
  Eigen::VectorXd Gprime(std::size_t j, const Eigen::VectorXd& phi) const { return model_.multiplicative(j) * phi; }
  // G~ f_j = alpha_j e_j.
  Eigen::VectorXd Gtilde(std::size_t j) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nm_);
    out[static_cast<Eigen::Index>(j)] = model_.alpha(j);
    return out;
  }

 private:
  const ModelSpec& model_;
  Eigen::Index n_;
  Eigen::Index nm_;
};

void require_case2_assumptions(const ModelSpec& model) {
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  const auto nm = static_cast<Eigen::Index>(model.n_modes());
  if (!model.satisfies_kernel_annihilation()) {
    throw Error(ErrorCode::InvalidModel, "B_c(a, a) != 0 for some kernel a");
  }
  if (!model.satisfies_stable_diagonal_annihilation()) {
    throw Error(ErrorCode::InvalidModel, "B_c(e_k, e_k) != 0 for some stable k");
  }
  const Eigen::MatrixXd& L = model.linear();
  const double off = std::max(L.block(0, n, n, nm - n).cwiseAbs().maxCoeff(),
                              L.block(n, 0, nm - n, n).cwiseAbs().maxCoeff());
  if (off > 1e-12 * std::max(1.0, L.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidModel, "L must commute with the kernel/stable projections");
  }
  for (std::size_t j = 0; j < std::min(model.n_kernel(), model.n_channels()); ++j) {
    if (model.alpha(j) != 0.0) {
      throw Error(ErrorCode::InvalidModel, "additive noise must not act on kernel modes (alpha_" +
                                               std::to_string(j + 1) + " != 0)");
    }
  }
}

}  // namespace

std::vector<double> cubic_tensor(const ModelSpec& model) {
  const std::size_t n = model.n_kernel();
  std::vector<double> out(n * n * n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      for (std::size_t c = b; c < n; ++c) {
        auto unit = [n](std::size_t k) {
          KernelVector v = KernelVector::zero(n);
          v[k] = 1.0;
          return v;
        };
        const KernelVector f = eval_F(model, unit(a), unit(b), unit(c));
        const std::size_t perms[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
        for (std::size_t m = 0; m < n; ++m) {
          for (const auto& p : perms) out[((m * n + p[0]) * n + p[1]) * n + p[2]] = 2.0 * f[m];
        }
      }
    }
  }
  return out;
}

AmplitudeSDE derive_case1(const ModelSpec& model) {
  if (!model.satisfies_kernel_annihilation()) {
    throw Error(ErrorCode::InvalidModel, "B_c(a, a) != 0 for some kernel a");
  }
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  AmplitudeSDE sde;
  sde.dim = model.n_kernel();
  sde.drift_lin = model.linear().topLeftCorner(n, n);
  sde.drift_cubic = cubic_tensor(model);
  for (std::size_t j = 0; j < model.n_channels(); ++j) {
    Eigen::VectorXd add = Eigen::VectorXd::Zero(n);
    if (static_cast<Eigen::Index>(j) < n) add[static_cast<Eigen::Index>(j)] = model.alpha(j);
    sde.diff_add.push_back(std::move(add));
    sde.diff_mult.push_back(model.multiplicative(j).topLeftCorner(n, n));
  }
  return sde;
}

Eigen::MatrixXd derive_lbar(const ModelSpec& model) {
  require_case2_assumptions(model);
  const Contractions t(model);
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  const auto cutoff = static_cast<Eigen::Index>(model.noise_cutoff());
  Eigen::MatrixXd lbar = model.linear().topLeftCorner(n, n);

  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::VectorXd phi = t.unit(m);
    Eigen::VectorXd corr = Eigen::VectorXd::Zero(phi.size());

    for (Eigen::Index i = n; i < cutoff; ++i) {
      const double a2 = model.alpha(static_cast<std::size_t>(i)) * model.alpha(static_cast<std::size_t>(i));
      if (a2 == 0.0) continue;
      const double li = model.lambda(static_cast<std::size_t>(i));
      const Eigen::VectorXd ei = t.unit(i);
      // -(2 alpha_i^2 / lambda_i^2) B_c(B_c(phi, e_i), e_i)
      corr -= (2.0 * a2 / (li * li)) * t.Pc(t.B(t.Pc(t.B(phi, ei)), ei));
      // -(alpha_i^2 / lambda_i) B_c(phi, A_s^{-1} B_s(e_i, e_i))
      corr -= (a2 / li) * t.Pc(t.B(phi, t.As_inv(t.Ps(t.B(ei, ei)))));
      // -(alpha_i^2 / lambda_i) B_c (I (x)_s A_s)^{-1} (e_i (x)_s B_s(phi, e_i))
      corr -= (a2 / li) * t.Bc_pair_inverse(i, t.Ps(t.B(phi, ei)));
    }
    for (std::size_t j = 0; j < model.n_channels(); ++j) {
      if (model.alpha(j) == 0.0) continue;
      const Eigen::VectorXd g_phi = t.Gprime(j, phi);
      // -2 B_c(G'_c(0)(phi) f_j, A_s^{-1} G~ f_j)
      corr -= 2.0 * t.Pc(t.B(t.Pc(g_phi), t.As_inv(t.Gtilde(j))));
      // -alpha_j B_c (I (x)_s A_s)^{-1} (e_j (x)_s G'_s(0)(phi) f_j), stable j only
      if (static_cast<Eigen::Index>(j) >= n) {
        corr -= model.alpha(j) * t.Bc_pair_inverse(static_cast<Eigen::Index>(j), t.Ps(g_phi));
      }
    }
    lbar.col(m) += t.kernel(corr);
  }
  if (!lbar.allFinite()) throw Error(ErrorCode::SingularOperator, "non-finite averaged drift");
  return lbar;
}

SigmaForm derive_sigma_form(const ModelSpec& model) {
  require_case2_assumptions(model);
  const Contractions t(model);
  const auto n = static_cast<Eigen::Index>(model.n_kernel());
  const auto cutoff = static_cast<Eigen::Index>(model.noise_cutoff());
  SigmaForm form;

  for (std::size_t j = 0; j < model.n_channels(); ++j) {
    // v_j(phi) = P_c[G'(0)(phi) f_j - 2 B(phi, A_s^{-1} G~ f_j)]
    const Eigen::VectorXd inv_noise = t.As_inv(t.Gtilde(j));
    Eigen::MatrixXd factor(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
      const Eigen::VectorXd phi = t.unit(m);
      factor.col(m) = t.kernel(t.Gprime(j, phi) - 2.0 * t.B(phi, inv_noise));
    }
    if (!factor.isZero(0.0)) form.linear_factors.push_back(std::move(factor));
  }
  for (Eigen::Index i = n; i < cutoff; ++i) {
    const double a2 = model.alpha(static_cast<std::size_t>(i)) * model.alpha(static_cast<std::size_t>(i));
    if (a2 == 0.0) continue;
    const double weight = a2 / (2.0 * model.lambda(static_cast<std::size_t>(i)));
    const Eigen::VectorXd ei = t.unit(i);
    for (std::size_t j = 0; j < model.n_channels(); ++j) {
      // w_ij = P_c[G'(0)(e_i) f_j] - B_c (I (x)_s A_s)^{-1} (e_i (x)_s G~ f_j)
      const Eigen::VectorXd w = t.kernel(t.Gprime(j, ei)) - t.kernel(t.Bc_pair_inverse(i, t.Ps(t.Gtilde(j))));
      if (w.isZero(0.0)) continue;
      form.constant_vectors.push_back(w);
      form.constant_weights.push_back(weight);
    }
  }
  return form;
}

Case2Spec derive_case2(const ModelSpec& model) {
  Case2Spec spec;
  spec.dim = model.n_kernel();
  spec.lbar = derive_lbar(model);
  spec.drift_cubic = cubic_tensor(model);
  spec.sigma_form = derive_sigma_form(model);
  if (spec.dim == 1) {
    Case2Sigmas s;
    s.sigma1 = spec.lbar(0, 0);
    s.sigma2 = spec.drift_cubic[0];
    for (const auto& v : spec.sigma_form.linear_factors) s.sigma3 += v(0, 0) * v(0, 0);
    for (std::size_t r = 0; r < spec.sigma_form.constant_vectors.size(); ++r) {
      const double w = spec.sigma_form.constant_vectors[r][0];
      s.sigma4 += spec.sigma_form.constant_weights[r] * w * w;
    }
    spec.sigmas = s;
  }
  return spec;
}

Case2OneDim derive_case2_1d(const ModelSpec& model) {
  if (model.n_kernel() != 1) {
    throw Error(ErrorCode::Dimension, "one-dimensional amplitude equation needs a one-dimensional kernel");
  }
  const Case2Spec spec = derive_case2(model);
  Case2OneDim out;
  out.sigmas = *spec.sigmas;
  AmplitudeSDE& sde = out.sde;
  sde.dim = 1;
  sde.drift_lin = Eigen::MatrixXd::Constant(1, 1, out.sigmas.sigma1);
  sde.drift_cubic = {out.sigmas.sigma2};
  sde.diff_add = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, std::sqrt(out.sigmas.sigma4))};
  sde.diff_mult = {Eigen::MatrixXd::Constant(1, 1, std::sqrt(out.sigmas.sigma3)), Eigen::MatrixXd::Zero(1, 1)};
  return out;
}

AmplitudeSDE case2_channel_form(const Case2Spec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.dim);
  AmplitudeSDE sde;
  sde.dim = spec.dim;
  sde.drift_lin = spec.lbar;
  sde.drift_cubic = spec.drift_cubic;
  for (const auto& v : spec.sigma_form.linear_factors) {
    sde.diff_add.push_back(Eigen::VectorXd::Zero(n));
    sde.diff_mult.push_back(v);
  }
  for (std::size_t r = 0; r < spec.sigma_form.constant_vectors.size(); ++r) {
    sde.diff_add.push_back(std::sqrt(spec.sigma_form.constant_weights[r]) * spec.sigma_form.constant_vectors[r]);
    sde.diff_mult.push_back(Eigen::MatrixXd::Zero(n, n));
  }
  return sde;
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::Dimension, "spd_sqrt needs a square matrix");
  if (s.size() == 0) return s;
  if (!s.allFinite()) throw Error(ErrorCode::NotPsd, "non-finite entry");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kPsdClamp * scale) {
    throw Error(ErrorCode::NotPsd, "matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
  Eigen::VectorXd ev = eig.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < -kPsdClamp * scale) {
      throw Error(ErrorCode::NotPsd, "eigenvalue " + std::to_string(ev[k]) + " is significantly negative");
    }
    ev[k] = std::sqrt(std::max(ev[k], 0.0));
  }
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

AmplitudeSDE rescale(const AmplitudeSDE& sde, double scale) {
  // x~ = s x: linear and multiplicative parts are invariant, the cubic picks
  // up 1/s^2 and additive terms pick up s.
  AmplitudeSDE out = sde;
  for (double& c : out.drift_cubic) c /= scale * scale;
  for (auto& a : out.diff_add) a *= scale;
  return out;
}

StratonovichLinearPart stratonovich_linear_part(const AmplitudeSDE& sde) {
  StratonovichLinearPart out{sde.drift_lin, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sde.dim))};
  for (std::size_t j = 0; j < sde.n_channels(); ++j) {
    out.linear -= 0.5 * sde.diff_mult[j] * sde.diff_mult[j];
    out.constant -= 0.5 * sde.diff_mult[j] * sde.diff_add[j];
  }
  return out;
}

}  // namespace ampeq
