#include "ampeq_cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "ampeq/amplitude.hpp"
#include "ampeq/error.hpp"
#include "ampeq/trajectory_io.hpp"

namespace ampeq::cli {
namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    config_error(key + ": expected a finite number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    config_error(key + ": expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) config_error(key + ": empty list");
  return out;
}

std::map<std::size_t, double> parse_modes(const std::string& key, const std::string& text) {
  std::map<std::size_t, double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) config_error(key + ": expected mode:value pairs");
    const auto mode = static_cast<std::size_t>(parse_uint(key, item.substr(0, colon)));
    if (!out.emplace(mode, parse_double(key, item.substr(colon + 1))).second) {
      config_error(key + ": mode " + std::to_string(mode) + " given twice");
    }
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_double(xs[i]);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"model",
       {{"kind",
         [](RunConfig& c, const std::string& v) {
           if (v == "burgers") {
             c.model.kind = ModelKind::Burgers;
           } else if (v == "generic") {
             c.model.kind = ModelKind::Generic;
           } else {
             config_error("model.kind: expected burgers or generic");
           }
         }},
        {"case",
         [](RunConfig& c, const std::string& v) {
           if (v != "I" && v != "II") config_error("model.case: expected I or II");
           c.model.reduction = v;
         }},
        {"nu", [](RunConfig& c, const std::string& v) { c.model.nu = parse_double("model.nu", v); }},
        {"alpha1", [](RunConfig& c, const std::string& v) { c.model.alpha1 = parse_double("model.alpha1", v); }},
        {"alpha2", [](RunConfig& c, const std::string& v) { c.model.alpha2 = parse_double("model.alpha2", v); }},
        {"alpha3", [](RunConfig& c, const std::string& v) { c.model.alpha3 = parse_double("model.alpha3", v); }},
        {"n_modes", [](RunConfig& c, const std::string& v) { c.model.n_modes = parse_uint("model.n_modes", v); }},
        {"file", [](RunConfig& c, const std::string& v) { c.model.file = v; }}}},
      {"sim",
       {{"epsilon", [](RunConfig& c, const std::string& v) { c.sim.epsilon = parse_double("sim.epsilon", v); }},
        {"T0", [](RunConfig& c, const std::string& v) { c.sim.T0 = parse_double("sim.T0", v); }},
        {"dt_slow", [](RunConfig& c, const std::string& v) { c.sim.dt_slow = parse_double("sim.dt_slow", v); }},
        {"dt_fast_factor",
         [](RunConfig& c, const std::string& v) { c.sim.dt_fast_factor = parse_double("sim.dt_fast_factor", v); }},
        {"seed", [](RunConfig& c, const std::string& v) { c.sim.seed = parse_uint("sim.seed", v); }},
        {"kappa", [](RunConfig& c, const std::string& v) { c.sim.kappa = parse_double("sim.kappa", v); }},
        {"n_paths", [](RunConfig& c, const std::string& v) { c.sim.n_paths = parse_uint("sim.n_paths", v); }},
        {"guard_scale",
         [](RunConfig& c, const std::string& v) { c.sim.guard_scale = parse_double("sim.guard_scale", v); }}}},
      {"experiment",
       {{"eps_grid",
         [](RunConfig& c, const std::string& v) { c.experiment.eps_grid = parse_list("experiment.eps_grid", v); }},
        {"nu_grid",
         [](RunConfig& c, const std::string& v) { c.experiment.nu_grid = parse_list("experiment.nu_grid", v); }},
        {"kernel0",
         [](RunConfig& c, const std::string& v) { c.experiment.kernel0 = parse_list("experiment.kernel0", v); }},
        {"stable0",
         [](RunConfig& c, const std::string& v) { c.experiment.stable0 = parse_modes("experiment.stable0", v); }},
        {"bootstrap_resamples",
         [](RunConfig& c, const std::string& v) {
           c.experiment.bootstrap_resamples = parse_uint("experiment.bootstrap_resamples", v);
         }},
        {"reduced_paths",
         [](RunConfig& c, const std::string& v) {
           c.experiment.reduced_paths = parse_uint("experiment.reduced_paths", v);
         }},
        {"lyapunov_T",
         [](RunConfig& c, const std::string& v) { c.experiment.lyapunov_T = parse_double("experiment.lyapunov_T", v); }},
        {"lyapunov_dt",
         [](RunConfig& c, const std::string& v) {
           c.experiment.lyapunov_dt = parse_double("experiment.lyapunov_dt", v);
         }},
        {"lyapunov_paths",
         [](RunConfig& c, const std::string& v) {
           c.experiment.lyapunov_paths = parse_uint("experiment.lyapunov_paths", v);
         }},
        {"ou_samples",
         [](RunConfig& c, const std::string& v) { c.experiment.ou_samples = parse_uint("experiment.ou_samples", v); }},
        {"trajectories",
         [](RunConfig& c, const std::string& v) {
           c.experiment.trajectories = parse_uint("experiment.trajectories", v);
         }}}},
      {"output", {{"dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }}}},
  };
  return s;
}

void validate(const RunConfig& c) {
  c.sim.validate();
  const ModelSpec model = build_model(c);
  try {
    if (c.model.reduction == "I") {
      derive_case1(model);
    } else {
      derive_case2(model);
    }
  } catch (const Error& err) {
    if (err.code() == ErrorCode::InvalidModel) config_error(err.what());
    throw;
  }
  const auto& e = c.experiment;
  for (std::size_t i = 0; i < e.eps_grid.size(); ++i) {
    if (!(e.eps_grid[i] > 0.0 && e.eps_grid[i] <= 0.5)) config_error("experiment.eps_grid: values must lie in (0, 0.5]");
    if (i > 0 && !(e.eps_grid[i] < e.eps_grid[i - 1])) config_error("experiment.eps_grid: must be strictly decreasing");
  }
  for (std::size_t i = 1; i < e.nu_grid.size(); ++i) {
    if (!(e.nu_grid[i] > e.nu_grid[i - 1])) config_error("experiment.nu_grid: must be strictly increasing");
  }
  if (e.kernel0.size() != model.n_kernel()) {
    config_error("experiment.kernel0: needs " + std::to_string(model.n_kernel()) + " entries");
  }
  for (const auto& [mode, value] : e.stable0) {
    if (mode <= model.n_kernel() || mode > model.n_modes()) {
      config_error("experiment.stable0: mode " + std::to_string(mode) + " is not a stable mode");
    }
  }
  if (!(e.lyapunov_T > 0.0) || !(e.lyapunov_dt > 0.0) || e.lyapunov_dt > e.lyapunov_T) {
    config_error("experiment.lyapunov_T / lyapunov_dt: need 0 < dt <= T");
  }
  if (e.lyapunov_paths < 2) config_error("experiment.lyapunov_paths: need at least 2");
  if (e.ou_samples < 2) config_error("experiment.ou_samples: need at least 2");
  if (c.output_dir.empty()) config_error("output.dir: must not be empty");
}

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const {
  const auto& a = sim;
  const auto& b = o.sim;
  return model == o.model && experiment == o.experiment && output_dir == o.output_dir && a.epsilon == b.epsilon &&
         a.T0 == b.T0 && a.dt_slow == b.dt_slow && a.dt_fast_factor == b.dt_fast_factor && a.seed == b.seed &&
         a.kappa == b.kappa && a.n_paths == b.n_paths && a.guard_scale == b.guard_scale;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& err) {
    config_error(std::string("malformed config: ") + err.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  const auto& s = schema();
  for (const auto& [section, entries] : tree) {
    const auto sec = s.find(section);
    if (sec == s.end()) config_error("unknown section [" + section + "]");
    if (!entries.data().empty() && entries.empty()) config_error("key '" + section + "' outside any section");
    for (const auto& [key, value] : entries) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) config_error("unknown key " + section + "." + key);
      setter->second(c, trim(value.data()));
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[model]\n";
  out << "kind = " << (c.model.kind == ModelKind::Burgers ? "burgers" : "generic") << '\n';
  out << "case = " << c.model.reduction << '\n';
  out << "nu = " << format_double(c.model.nu) << '\n';
  out << "alpha1 = " << format_double(c.model.alpha1) << '\n';
  out << "alpha2 = " << format_double(c.model.alpha2) << '\n';
  out << "alpha3 = " << format_double(c.model.alpha3) << '\n';
  out << "n_modes = " << c.model.n_modes << '\n';
  if (!c.model.file.empty()) out << "file = " << c.model.file << '\n';
  out << "\n[sim]\n";
  out << "epsilon = " << format_double(c.sim.epsilon) << '\n';
  out << "T0 = " << format_double(c.sim.T0) << '\n';
  out << "dt_slow = " << format_double(c.sim.dt_slow) << '\n';
  out << "dt_fast_factor = " << format_double(c.sim.dt_fast_factor) << '\n';
  out << "seed = " << c.sim.seed << '\n';
  out << "kappa = " << format_double(c.sim.kappa) << '\n';
  out << "n_paths = " << c.sim.n_paths << '\n';
  out << "guard_scale = " << format_double(c.sim.guard_scale) << '\n';
  const auto& e = c.experiment;
  out << "\n[experiment]\n";
  out << "eps_grid = " << join(e.eps_grid) << '\n';
  out << "nu_grid = " << join(e.nu_grid) << '\n';
  out << "kernel0 = " << join(e.kernel0) << '\n';
  std::string modes;
  for (const auto& [mode, value] : e.stable0) modes += (modes.empty() ? "" : ", ") + std::to_string(mode) + ":" + format_double(value);
  out << "stable0 = " << modes << '\n';
  out << "bootstrap_resamples = " << e.bootstrap_resamples << '\n';
  out << "reduced_paths = " << e.reduced_paths << '\n';
  out << "lyapunov_T = " << format_double(e.lyapunov_T) << '\n';
  out << "lyapunov_dt = " << format_double(e.lyapunov_dt) << '\n';
  out << "lyapunov_paths = " << e.lyapunov_paths << '\n';
  out << "ou_samples = " << e.ou_samples << '\n';
  out << "trajectories = " << e.trajectories << '\n';
  out << "\n[output]\n";
  out << "dir = " << c.output_dir << '\n';
  return out.str();
}

ModelSpec build_model(const RunConfig& c) {
  const NoiseScaling scaling = c.model.reduction == "I" ? NoiseScaling::AdditiveEps2 : NoiseScaling::AdditiveEps1;
  try {
    if (c.model.kind == ModelKind::Generic) {
      if (c.model.file.empty()) config_error("model.file is required for generic models");
      std::filesystem::path p(c.model.file);
      if (p.is_relative()) p = c.base_dir / p;
      return model_from_json_file(p, scaling);
    }
    BurgersParams p;
    p.nu = c.model.nu;
    p.alphas = {c.model.alpha1, c.model.alpha2, c.model.alpha3};
    p.n_modes = c.model.n_modes;
    p.scaling = scaling;
    return build_burgers_model(p);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::InvalidModel) config_error(err.what());
    throw;
  }
}

ModelSpec model_from_json_file(const std::filesystem::path& path, NoiseScaling scaling) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    config_error("model file " + path.string() + ": " + err.what());
  }
  const std::set<std::string> known{"n_kernel", "lambdas", "linear", "bilinear", "noise_amplitudes", "multiplicative",
                                    "norm_index"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) config_error("model file: unknown key '" + item.key() + "'");
  }
  try {
    ModelData d;
    d.n_kernel = j.at("n_kernel").get<std::size_t>();
    const auto lambdas = j.at("lambdas").get<std::vector<double>>();
    const auto nm = static_cast<Eigen::Index>(lambdas.size());
    d.lambdas = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), nm);
    d.linear = Eigen::MatrixXd::Zero(nm, nm);
    if (j.contains("linear")) {
      const auto rows = j.at("linear").get<std::vector<std::vector<double>>>();
      if (static_cast<Eigen::Index>(rows.size()) != nm) config_error("model file: linear must be n_modes x n_modes");
      for (Eigen::Index r = 0; r < nm; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != nm) config_error("model file: linear must be n_modes x n_modes");
        for (Eigen::Index k = 0; k < nm; ++k) d.linear(r, k) = rows[r][k];
      }
    }
    for (const auto& e : j.value("bilinear", nlohmann::json::array())) {
      const auto t = e.get<std::vector<double>>();
      if (t.size() != 4) config_error("model file: bilinear entries are [i, j, k, value]");
      d.bilinear.push_back({static_cast<int>(t[0]) - 1, static_cast<int>(t[1]) - 1, static_cast<int>(t[2]) - 1, t[3]});
    }
    const auto alphas = j.value("noise_amplitudes", std::vector<double>{});
    d.noise_amplitudes = Eigen::Map<const Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    const auto mult = j.value("multiplicative", nlohmann::json::array());
    if (!mult.empty() && mult.size() != alphas.size()) {
      config_error("model file: one multiplicative entry list per noise channel");
    }
    for (std::size_t ch = 0; ch < alphas.size(); ++ch) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nm, nm);
      if (!mult.empty()) {
        for (const auto& e : mult[ch]) {
          const auto t = e.get<std::vector<double>>();
          if (t.size() != 3) config_error("model file: multiplicative entries are [k, i, value]");
          const auto k = static_cast<Eigen::Index>(t[0]) - 1;
          const auto i = static_cast<Eigen::Index>(t[1]) - 1;
          if (k < 0 || i < 0 || k >= nm || i >= nm) config_error("model file: multiplicative index out of range");
          m(k, i) = t[2];
        }
      }
      d.multiplicative.push_back(std::move(m));
    }
    d.norm_index = j.value("norm_index", 0.0);
    d.scaling = scaling;
    return ModelSpec(std::move(d));
  } catch (const nlohmann::json::exception& err) {
    config_error("model file " + path.string() + ": " + err.what());
  }
}

}  // namespace ampeq::cli
