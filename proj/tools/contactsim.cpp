#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include <Eigen/Core>

#include "contactsim/cli.hpp"

int main(int argc, char** argv) {
  // CONTACTSIM_THREADS caps internal parallelism (0 = auto).
  if (const char* threads = std::getenv("CONTACTSIM_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"Quasistatic viscoelastic contact simulator with wear and damage"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite, mesh_path;

  CLI::App* run = app.add_subcommand("run", "solve the coupled problem and write CSV trajectories");
  run->add_option("--config", config_path, "run configuration file")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* verify = app.add_subcommand("verify", "run the oracle and convergence suites");
  verify->add_option("--suite", suite, "oracles | heat | lipschitz | all")->required();

  CLI::App* estimate = app.add_subcommand("estimate", "print the contraction constant ledger");
  estimate->add_option("--config", config_path, "run configuration file")->required();

  CLI::App* info = app.add_subcommand("mesh-info", "print mesh statistics");
  info->add_option("--mesh", mesh_path, "mesh file")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return contactsim::cmd_run(config_path, out_dir, std::cout, std::cerr);
  if (verify->parsed()) return contactsim::cmd_verify(suite, std::cout, std::cerr);
  if (estimate->parsed()) return contactsim::cmd_estimate(config_path, std::cout, std::cerr);
  if (info->parsed()) return contactsim::cmd_mesh_info(mesh_path, std::cout, std::cerr);
  return 1;
}
