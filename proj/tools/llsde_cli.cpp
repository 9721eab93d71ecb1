// Command-line experiment runner for the LL scheme library.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "llsde/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"weak Local Linearization schemes for additive-noise SDEs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;

  auto* conv = app.add_subcommand(
      "run-convergence", "run a weak-convergence study from a config file");
  conv->add_option("config", config_path, "experiment config file")->required();
  conv->add_option("--threads", threads, "worker thread count");
  conv->add_option("--out", out_dir, "output directory override");

  std::optional<std::uint64_t> seed_override;
  std::optional<double> h_override;
  std::uint64_t seed_val = 0;
  double h_val = 0.0;
  auto* traj = app.add_subcommand(
      "run-trajectory", "simulate and write a single sample path");
  // free the short -h flag so --h can mean the step size
  traj->set_help_flag("--help", "print help");
  traj->add_option("config", config_path, "experiment config file")->required();
  auto* seed_opt = traj->add_option("--seed", seed_val, "seed override");
  auto* h_opt = traj->add_option("--h", h_val, "step size override");
  traj->add_option("--out", out_dir, "output directory override");

  auto* list = app.add_subcommand("list-schemes", "list scheme variants");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      std::cout << llsde::list_schemes_text();
      return 0;
    }
    llsde::ExperimentConfig cfg = llsde::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.plan.threads = threads;
    if (conv->parsed()) {
      llsde::run_convergence(cfg);
      return 0;
    }
    if (seed_opt->count() > 0) seed_override = seed_val;
    if (h_opt->count() > 0) h_override = h_val;
    llsde::run_trajectory(cfg, seed_override, h_override);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
