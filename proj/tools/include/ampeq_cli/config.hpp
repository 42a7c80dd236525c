#pragma once

// Run configuration: one INI file with [model], [sim], [experiment] and
// [output] sections. Grammar is documented in README.md.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "ampeq/burgers.hpp"
#include "ampeq/sim.hpp"
#include "ampeq/spectral.hpp"

namespace ampeq::cli {

enum class ModelKind { Burgers, Generic };

struct ModelSection {
  ModelKind kind = ModelKind::Burgers;
  /// "I" (eps^2 additive noise) or "II" (eps additive noise).
  std::string reduction = "I";
  double nu = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  std::size_t n_modes = 32;
  /// Generic models: JSON file, relative paths resolve against the config file.
  std::string file;

  bool operator==(const ModelSection&) const = default;
};

struct ExperimentSection {
  std::vector<double> eps_grid{0.1, 0.05, 0.025};
  std::vector<double> nu_grid{0.0, 0.005, 0.01, 0.015, 0.02};
  /// Rescaled kernel amplitude at T = 0.
  std::vector<double> kernel0{0.3};
  /// Rescaled stable part at T = 0 as 1-based mode -> value.
  std::map<std::size_t, double> stable0;
  std::size_t bootstrap_resamples = 400;
  std::size_t reduced_paths = 0;
  double lyapunov_T = 200.0;
  double lyapunov_dt = 0.01;
  std::size_t lyapunov_paths = 1000;
  std::size_t ou_samples = 100000;
  std::size_t trajectories = 1;

  bool operator==(const ExperimentSection&) const = default;
};

struct RunConfig {
  ModelSection model;
  SimConfig sim;
  ExperimentSection experiment;
  std::string output_dir = "out";
  /// Directory of the file the config was read from (not serialised).
  std::filesystem::path base_dir;

  bool operator==(const RunConfig& o) const;
};

/// Parses and validates; throws Error(Config) on unknown keys, malformed
/// values or parameters that violate model / simulation invariants.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// Builds the ModelSpec described by the [model] section.
ModelSpec build_model(const RunConfig& config);
/// Model built from a generic JSON description (1-based indices).
ModelSpec model_from_json_file(const std::filesystem::path& path, NoiseScaling scaling);

}  // namespace ampeq::cli
