#include "ampeq_cli/commands.hpp"

#include <openssl/evp.h>

#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ampeq/amplitude.hpp"
#include "ampeq/error.hpp"
#include "ampeq/experiments.hpp"
#include "ampeq/noise.hpp"
#include "ampeq/trajectory_io.hpp"

#ifndef AMPEQ_VERSION
#define AMPEQ_VERSION "unknown"
#endif

namespace ampeq::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Nonzero entries [m, a, b, c, value], 1-based.
json cubic_json(const std::vector<double>& tensor, std::size_t dim) {
  json out = json::array();
  for (std::size_t m = 0; m < dim; ++m)
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b)
        for (std::size_t c = 0; c < dim; ++c) {
          const double v = tensor[((m * dim + a) * dim + b) * dim + c];
          if (v != 0.0) out.push_back({m + 1, a + 1, b + 1, c + 1, v});
        }
  return out;
}

json sde_json(const AmplitudeSDE& sde, const std::string& coordinates) {
  json channels = json::array();
  for (std::size_t j = 0; j < sde.n_channels(); ++j) {
    if (sde.diff_add[j].isZero(0.0) && sde.diff_mult[j].isZero(0.0)) continue;
    channels.push_back({{"channel", j + 1},
                        {"additive", vector_json(sde.diff_add[j])},
                        {"multiplicative", matrix_json(sde.diff_mult[j])}});
  }
  return {{"convention", "ito"},
          {"coordinates", coordinates},
          {"dim", sde.dim},
          {"drift_linear", matrix_json(sde.drift_lin)},
          {"drift_cubic", cubic_json(sde.drift_cubic, sde.dim)},
          {"noise_channels", std::move(channels)}};
}

json deviation(double oracle, double reference, const std::string& formula) {
  return {{"oracle", oracle}, {"reference", reference}, {"reference_formula", formula}, {"abs_deviation", std::abs(oracle - reference)}};
}

json model_json(const RunConfig& c, const ModelSpec& model) {
  json m = {{"kind", c.model.kind == ModelKind::Burgers ? "burgers" : "generic"},
            {"case", c.model.reduction},
            {"n_modes", model.n_modes()},
            {"n_kernel", model.n_kernel()},
            {"noise_cutoff", model.noise_cutoff()}};
  if (c.model.kind == ModelKind::Burgers) {
    m["nu"] = c.model.nu;
    m["alphas"] = {c.model.alpha1, c.model.alpha2, c.model.alpha3};
  } else {
    m["file"] = c.model.file;
  }
  return m;
}

json derive_case1_json(const RunConfig& c, const ModelSpec& model) {
  const AmplitudeSDE sde = derive_case1(model);
  json doc;
  doc["amplitude_equation"] = sde_json(sde, "kernel basis");
  const auto strat = stratonovich_linear_part(sde);
  doc["stratonovich"] = {{"coordinates", "kernel basis"},
                         {"linear", matrix_json(strat.linear)},
                         {"constant", vector_json(strat.constant)}};
  if (c.model.kind != ModelKind::Burgers) return doc;

  const double s = sin_x_scale();
  const AmplitudeSDE sx = rescale(sde, s);
  doc["amplitude_equation_sin_x"] = sde_json(sx, "sin(x)");
  const double pi32 = std::pow(std::numbers::pi, 1.5);
  const double a1 = c.model.alpha1;
  const double a3 = c.model.alpha3;
  json dev;
  dev["linear"] = deviation(sx.drift_lin(0, 0), c.model.nu, "nu");
  dev["cubic"] = deviation(sx.cubic(0, 0, 0, 0), -1.0 / 12.0, "-1/12");
  json add = deviation(sx.diff_add[0][0], a1, "alpha1");
  add["oracle_kernel_basis"] = sde.diff_add[0][0];
  add["note"] = "the printed additive coefficient is the kernel-basis value; in sin(x) units it carries sqrt(2/pi)";
  dev["additive_channel_1"] = std::move(add);
  dev["multiplicative_channel_1"] =
      deviation(sx.diff_mult[0](0, 0), 8.0 * std::sqrt(2.0) * a1 / (3.0 * pi32), "8 sqrt(2) alpha1 / (3 pi^(3/2))");
  if (sx.n_channels() > 2) {
    dev["multiplicative_channel_3"] = deviation(sx.diff_mult[2](0, 0), -8.0 * std::sqrt(2.0) * a3 / (15.0 * pi32),
                                                "-8 sqrt(2) alpha3 / (15 pi^(3/2))");
    if (a1 == 0.0) {
      const auto sxs = stratonovich_linear_part(sx);
      const double pi3 = std::pow(std::numbers::pi, 3);
      dev["stratonovich_linear"] =
          deviation(sxs.linear(0, 0), c.model.nu - 64.0 * a3 * a3 / (225.0 * pi3), "nu - 64 alpha3^2 / (225 pi^3)");
      dev["stratonovich_multiplicative_channel_3"] = deviation(
          sx.diff_mult[2](0, 0), -8.0 * std::sqrt(2.0) * a3 / (225.0 * pi32), "-8 sqrt(2) alpha3 / (225 pi^(3/2))");
      dev["stability_threshold"] = {{"oracle", 0.5 * sx.diff_mult[2](0, 0) * sx.diff_mult[2](0, 0)},
                                    {"statement", "zero is locally stable for nu below the threshold, unstable above"}};
    }
  }
  doc["paper_deviation"] = std::move(dev);
  return doc;
}

json derive_case2_json(const RunConfig& c, const ModelSpec& model) {
  const Case2Spec spec = derive_case2(model);
  json doc;
  json factors = json::array();
  for (const auto& v : spec.sigma_form.linear_factors) factors.push_back(matrix_json(v));
  json constants = json::array();
  for (const auto& w : spec.sigma_form.constant_vectors) constants.push_back(vector_json(w));
  doc["averaged_equation"] = {{"convention", "ito"},
                              {"coordinates", "kernel basis"},
                              {"dim", spec.dim},
                              {"lbar", matrix_json(spec.lbar)},
                              {"drift_cubic", cubic_json(spec.drift_cubic, spec.dim)},
                              {"sigma_form",
                               {{"linear_factors", std::move(factors)},
                                {"constant_vectors", std::move(constants)},
                                {"constant_weights", spec.sigma_form.constant_weights}}}};
  if (model.n_kernel() != 1) return doc;

  const Case2OneDim one = derive_case2_1d(model);
  const auto& sg = one.sigmas;
  doc["sigmas"] = {{"coordinates", "kernel basis"},
                   {"sigma1", sg.sigma1},
                   {"sigma2", sg.sigma2},
                   {"sigma3", sg.sigma3},
                   {"sigma4", sg.sigma4}};
  doc["scalar_equation"] = sde_json(one.sde, "kernel basis");
  if (c.model.kind != ModelKind::Burgers) return doc;

  const double s2 = sin_x_scale() * sin_x_scale();
  const double x1 = sg.sigma1;
  const double x2 = sg.sigma2 / s2;
  const double x3 = sg.sigma3;
  const double x4 = sg.sigma4 * s2;
  doc["sigmas_sin_x"] = {{"coordinates", "sin(x)"}, {"sigma1", x1}, {"sigma2", x2}, {"sigma3", x3}, {"sigma4", x4}};
  const double pi = std::numbers::pi;
  const double pi3 = pi * pi * pi;
  const double a3 = c.model.alpha3;
  json dev;
  dev["sigma1"] = deviation(x1, c.model.nu - a3 * a3 / (4048.0 * pi), "nu - alpha3^2 / (4048 pi)");
  dev["sigma2"] = deviation(x2, -1.0 / 12.0, "-1/12");
  dev["sigma3"] = deviation(x3, 128.0 * a3 * a3 / (225.0 * pi3), "128 alpha3^2 / (225 pi^3)");
  json d4 = deviation(x4, 5184.0 * std::pow(a3, 4) / (1225.0 * pi3), "5184 alpha3^4 / (1225 pi^3)");
  d4["oracle_kernel_basis"] = sg.sigma4;
  d4["abs_deviation_kernel_basis"] = std::abs(sg.sigma4 - d4["reference"].get<double>());
  dev["sigma4"] = std::move(d4);
  doc["paper_deviation"] = std::move(dev);
  return doc;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
    files_.push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const json& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  json files_ = json::array();
};

std::vector<std::pair<std::string, std::string>> run_metadata(const RunConfig& c, std::size_t path) {
  return {{"case", c.model.reduction},
          {"epsilon", format_double(c.sim.epsilon)},
          {"seed", std::to_string(c.sim.seed)},
          {"path", std::to_string(path)}};
}

ErrorScalingSetup scaling_setup(const RunConfig& c, const ModelSpec& model) {
  ErrorScalingSetup setup;
  setup.kernel0 = Eigen::Map<const Eigen::VectorXd>(c.experiment.kernel0.data(),
                                                    static_cast<Eigen::Index>(c.experiment.kernel0.size()));
  if (!c.experiment.stable0.empty()) {
    setup.stable0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n_modes()));
    for (const auto& [mode, value] : c.experiment.stable0) setup.stable0[static_cast<Eigen::Index>(mode - 1)] = value;
  }
  setup.bootstrap_resamples = c.experiment.bootstrap_resamples;
  setup.reduced_paths = c.experiment.reduced_paths;
  return setup;
}

SpectralField initial_field(const RunConfig& c, const ModelSpec& model, const ErrorScalingSetup& setup) {
  const double eps = c.sim.epsilon;
  SpectralField u = SpectralField::zero(model.n_modes());
  u.coeffs.head(setup.kernel0.size()) = eps * setup.kernel0;
  const double scale = c.model.reduction == "I" ? eps * eps : eps;
  for (const auto& [mode, value] : c.experiment.stable0) u.coeffs[static_cast<Eigen::Index>(mode - 1)] += scale * value;
  return u;
}

ReductionCase reduction_of(const RunConfig& c) { return c.model.reduction == "I" ? ReductionCase::I : ReductionCase::II; }

std::vector<std::string> cmd_simulate(const RunConfig& c, const ModelSpec& model, ArtifactWriter& out) {
  const ErrorScalingSetup setup = scaling_setup(c, model);
  const SpectralField u0 = initial_field(c, model, setup);
  const NoiseSource noise = make_noise(model, c.sim);
  std::vector<std::string> warnings;
  std::optional<AmplitudeSDE> sde;
  std::optional<Case2Spec> spec;
  if (c.model.reduction == "I") {
    sde = derive_case1(model);
  } else if (model.n_kernel() == 1) {
    sde = derive_case2_1d(model).sde;
  } else {
    spec = derive_case2(model);
  }
  const NoiseSource reduced_noise =
      c.model.reduction == "I" ? noise : NoiseSource::slow_only(c.sim.seed, c.sim.dt_slow, 1);
  AmplitudeOptions opts;
  opts.fine_grid = c.model.reduction == "I";
  for (std::size_t p = 0; p < c.experiment.trajectories; ++p) {
    const Trajectory u = simulate_spde(model, c.sim, noise, p, u0);
    const Trajectory y = sde ? simulate_amplitude(*sde, c.sim, reduced_noise, p, setup.kernel0, opts)
                             : simulate_sigma_form(*spec, c.sim, reduced_noise, p, setup.kernel0);
    std::ostringstream full;
    write_trajectory_csv(full, u, TrajectoryKind::Full, run_metadata(c, p));
    out.write("full_path_" + std::to_string(p) + ".csv", full.str());
    std::ostringstream reduced;
    write_trajectory_csv(reduced, y, TrajectoryKind::Reduced, run_metadata(c, p));
    out.write("reduced_path_" + std::to_string(p) + ".csv", reduced.str());
    if (u.stopped_at) warnings.push_back("full path " + std::to_string(p) + " stopped at T = " + format_double(*u.stopped_at));
    if (y.stopped_at) {
      warnings.push_back("reduced path " + std::to_string(p) + " stopped at T = " + format_double(*y.stopped_at));
    }
  }
  return warnings;
}

json interval_json(const stats::Interval& i) { return {{"estimate", i.estimate}, {"lower", i.lower}, {"upper", i.upper}}; }

json law_json(const LawComparison& law) {
  return {{"full_samples", law.full_samples},   {"reduced_samples", law.reduced_samples},
          {"full_mean", vector_json(law.full_mean)},   {"reduced_mean", vector_json(law.reduced_mean)},
          {"full_var", vector_json(law.full_var)},     {"reduced_var", vector_json(law.reduced_var)},
          {"ks_per_mode", law.ks_per_mode},             {"ks", law.ks}};
}

std::vector<std::string> cmd_compare(const RunConfig& c, const ModelSpec& model, ArtifactWriter& out) {
  const ErrorScalingSetup setup = scaling_setup(c, model);
  const ErrorReport report = run_error_scaling(model, reduction_of(c), c.sim, c.experiment.eps_grid, setup);
  json per = json::array();
  std::ostringstream errors;
  errors << "epsilon,path,error\n";
  std::ostringstream dat;
  dat << "# log_eps log_mean_error mean median q10 q90\n";
  for (const auto& r : report.per_eps) {
    json e = {{"epsilon", r.epsilon},
              {"n_paths", r.n_paths},
              {"n_stopped", r.n_stopped},
              {"stopped_fraction", interval_json(r.stopped_fraction)},
              {"mean", r.mean},
              {"median", r.median},
              {"q10", r.q10},
              {"q90", r.q90},
              {"exceedance_threshold", r.exceedance_threshold},
              {"exceedance", interval_json(r.exceedance)},
              {"usable", r.usable}};
    if (r.law) e["law"] = law_json(*r.law);
    per.push_back(std::move(e));
    for (std::size_t p = 0; p < r.errors.size(); ++p) {
      errors << format_double(r.epsilon) << ',' << p << ',' << format_double(r.errors[p]) << '\n';
    }
    dat << format_double(std::log(r.epsilon)) << ' ' << format_double(std::log(r.mean)) << ' ' << format_double(r.mean)
        << ' ' << format_double(r.median) << ' ' << format_double(r.q10) << ' ' << format_double(r.q90) << '\n';
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"case", c.model.reduction},
              {"eps_grid", report.eps_grid},
              {"n_paths", report.n_paths},
              {"theorem_exponent", report.theorem_exponent},
              {"fitted_slope", report.fitted_slope},
              {"slope_se", report.slope_se},
              {"bootstrap_resamples", report.bootstrap_resamples},
              {"per_eps", std::move(per)},
              {"warnings", report.warnings}};
  if (reduction_of(c) == ReductionCase::II) {
    bool decreasing = true;
    for (std::size_t i = 1; i < report.per_eps.size(); ++i) {
      decreasing = decreasing && report.per_eps[i].law->ks < report.per_eps[i - 1].law->ks;
    }
    doc["ks_decreasing"] = decreasing;
  }
  out.write_json("error_report.json", doc);
  out.write("errors.csv", errors.str());
  out.write("error_scaling.dat", dat.str());
  return report.warnings;
}

std::function<AmplitudeSDE(double)> stability_family(const RunConfig& c, const ModelSpec& model) {
  if (c.model.kind == ModelKind::Burgers) {
    return [c](double nu) {
      RunConfig shifted = c;
      shifted.model.nu = nu;
      return derive_case1(build_model(shifted));
    };
  }
  const AmplitudeSDE base = derive_case1(model);
  return [base](double nu) {
    AmplitudeSDE sde = base;
    sde.drift_lin += nu * Eigen::MatrixXd::Identity(sde.dim, sde.dim);
    return sde;
  };
}

std::vector<std::string> cmd_stability(const RunConfig& c, const ModelSpec& model, ArtifactWriter& out) {
  if (c.model.reduction != "I") throw Error(ErrorCode::Config, "stability uses the case I amplitude equation");
  LyapunovConfig lc;
  lc.T = c.experiment.lyapunov_T;
  lc.dt = c.experiment.lyapunov_dt;
  lc.n_paths = c.experiment.lyapunov_paths;
  lc.seed = c.sim.seed;
  const StabilityReport report = run_stability(stability_family(c, model), c.experiment.nu_grid, lc);
  json est = json::array();
  std::ostringstream csv;
  csv << "nu,exponent,se,closed_form\n";
  for (std::size_t i = 0; i < report.nu_grid.size(); ++i) {
    const auto& e = report.estimates[i];
    est.push_back({{"nu", report.nu_grid[i]}, {"exponent", e.exponent}, {"se", e.se}, {"closed_form", e.closed_form}});
    csv << format_double(report.nu_grid[i]) << ',' << format_double(e.exponent) << ',' << format_double(e.se) << ','
        << format_double(e.closed_form) << '\n';
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"T", lc.T},
              {"dt", lc.dt},
              {"n_paths", lc.n_paths},
              {"estimates", std::move(est)},
              {"threshold_estimate", report.threshold_estimate},
              {"threshold_se", report.threshold_se},
              {"threshold_closed_form", report.threshold_closed_form},
              {"monotone", report.monotone}};
  out.write_json("stability.json", doc);
  out.write("stability.csv", csv.str());
  std::vector<std::string> warnings;
  if (!report.monotone) warnings.push_back("Lyapunov estimates are not increasing in nu");
  return warnings;
}

std::vector<std::string> cmd_report(const RunConfig& c, const ModelSpec& model, ArtifactWriter& out) {
  const OuVarianceReport report = ou_variance_test(model, c.sim, c.experiment.ou_samples);
  json modes = json::array();
  std::ostringstream csv;
  csv << "mode,expected,variance,se,mean,mean_se,within_3se\n";
  std::vector<std::string> warnings;
  for (const auto& m : report.modes) {
    if (m.expected == 0.0) continue;
    modes.push_back({{"mode", m.mode + 1},
                     {"expected", m.expected},
                     {"variance", m.variance},
                     {"se", m.se},
                     {"mean", m.mean},
                     {"mean_se", m.mean_se},
                     {"within_3se", m.within_3se}});
    csv << m.mode + 1 << ',' << format_double(m.expected) << ',' << format_double(m.variance) << ','
        << format_double(m.se) << ',' << format_double(m.mean) << ',' << format_double(m.mean_se) << ','
        << (m.within_3se ? 1 : 0) << '\n';
    if (!m.within_3se) warnings.push_back("mode " + std::to_string(m.mode + 1) + " outside 3 SE of the stationary law");
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"epsilon", report.epsilon},
              {"n_samples", report.n_samples},
              {"modes", std::move(modes)}};
  out.write_json("ou_report.json", doc);
  out.write("ou_report.csv", csv.str());
  return warnings;
}

json versions() {
  return {{"ampeq", AMPEQ_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__}};
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidModel:
    case ErrorCode::Precondition:
    case ErrorCode::Dimension:
      return kExitConfig;
    case ErrorCode::Io:
      return kExitIo;
    default:
      return kExitNumerical;
  }
}

std::string command_name(Command command) {
  switch (command) {
    case Command::Derive: return "derive";
    case Command::Simulate: return "simulate";
    case Command::Compare: return "compare";
    case Command::Stability: return "stability";
    case Command::Report: return "report";
  }
  return "unknown";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

json derive_document(const RunConfig& config) {
  const ModelSpec model = build_model(config);
  json doc = config.model.reduction == "I" ? derive_case1_json(config, model) : derive_case2_json(config, model);
  doc["schema_version"] = kSchemaVersion;
  doc["model"] = model_json(config, model);
  return doc;
}

int run_command(Command command, const fs::path& config_path, std::ostream& err) {
  try {
    const std::string raw = file_bytes(config_path);
    const RunConfig config = load_config(config_path);
    const ModelSpec model = build_model(config);
    ArtifactWriter out(fs::path(config.output_dir) / command_name(command));
    std::vector<std::string> warnings;
    switch (command) {
      case Command::Derive: out.write_json("amplitude.json", derive_document(config)); break;
      case Command::Simulate: warnings = cmd_simulate(config, model, out); break;
      case Command::Compare: warnings = cmd_compare(config, model, out); break;
      case Command::Stability: warnings = cmd_stability(config, model, out); break;
      case Command::Report: warnings = cmd_report(config, model, out); break;
    }
    json manifest = {{"schema_version", kSchemaVersion},
                     {"command", command_name(command)},
                     {"config_sha256", sha256_hex(raw)},
                     {"config", serialize_config(config)},
                     {"seed", config.sim.seed},
                     {"versions", versions()},
                     {"warnings", warnings},
                     {"files", out.files()}};
    std::ofstream mf(out.dir() / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << '\n';
    mf.close();
    if (!mf) throw Error(ErrorCode::Io, "cannot write manifest");
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace ampeq::cli
