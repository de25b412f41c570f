#include <array>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "polyb/commands.hpp"

namespace {

// Flags that override config-file keys of the same name.
const char* const kOverrides[][2] = {
    {"--out", "out"},     {"--order", "order"}, {"--levels", "levels"}, {"--family", "family"},
    {"--problem", "problem"}, {"--nu", "nu"},   {"--kappa", "kappa"},   {"--pr", "pr"},
    {"--ra", "ra"},       {"--tau1", "tau1"},   {"--tau2", "tau2"},     {"--taut", "taut"},
    {"--tol", "tol"},     {"--seed", "seed"},   {"--samples", "samples"}, {"--max-iter", "max_iter"},
    {"--mesh-file", "mesh_file"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized virtual element solver for the Boussinesq equations"};
  app.require_subcommand(1);
  std::string config_path;
  std::string command;
  std::array<std::optional<std::string>, std::size(kOverrides)> values;
  bool to_stdout = false;

  for (const char* name : {"converge", "solve", "equivalence", "mesh"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value file")->required();
    for (std::size_t i = 0; i < std::size(kOverrides); ++i) sub->add_option(kOverrides[i][0], values[i]);
    if (std::string(name) == "mesh") sub->add_flag("--stdout", to_stdout, "write a single mesh to standard output");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return polyb::kExitConfig;
  }

  polyb::RunConfig cfg;
  try {
    cfg = polyb::load_config(config_path);
    for (std::size_t i = 0; i < std::size(kOverrides); ++i) {
      if (values[i]) polyb::apply_setting(cfg, kOverrides[i][1], *values[i]);
    }
  } catch (const polyb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return polyb::kExitConfig;
  }

  if (command == "converge") return polyb::cmd_converge(cfg, std::cout, std::cerr);
  if (command == "solve") return polyb::cmd_solve(cfg, std::cout, std::cerr);
  if (command == "equivalence") return polyb::cmd_equivalence(cfg, std::cout, std::cerr);
  return polyb::cmd_mesh(cfg, std::cout, std::cerr, to_stdout);
}
