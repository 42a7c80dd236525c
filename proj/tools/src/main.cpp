#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

#include "ampeq_cli/commands.hpp"

int main(int argc, char** argv) {
  using ampeq::cli::Command;
  CLI::App app{"Amplitude-equation derivation and Monte Carlo verification for SPDEs with quadratic nonlinearity"};
  app.require_subcommand(1);
  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"derive", {Command::Derive, "Write the derived amplitude equation as JSON"}},
      {"simulate", {Command::Simulate, "Simulate full and reduced trajectories"}},
      {"compare", {Command::Compare, "Error-scaling campaign over experiment.eps_grid"}},
      {"stability", {Command::Stability, "Lyapunov exponents over experiment.nu_grid"}},
      {"report", {Command::Report, "Stationary statistics of the stable-mode OU processes"}},
  };
  std::string config;
  std::optional<Command> chosen;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.second);
    sub->add_option("config", config, "Path to the INI run configuration")->required();
    sub->callback([&chosen, c = entry.first] { chosen = c; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ampeq::cli::kExitConfig;
  }
  return ampeq::cli::run_command(*chosen, config, std::cerr);
}
