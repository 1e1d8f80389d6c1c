#include <CLI11.hpp>
#include <iostream>

#include "exstop/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"excursion-stop: optimal drawdown stopping for one-dimensional "
               "diffusions with maximum-dependent absorption"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  bool quiet = false;
  app.add_option("--out-dir", out_dir, "directory for CSV output");
  app.add_flag("--quiet", quiet, "suppress the summary printout");

  std::string solve_cfg;
  auto* solve = app.add_subcommand("solve", "compute V(s,s), thresholds and the value surface");
  solve->add_option("config", solve_cfg, "problem config file")->required();

  std::string sim_cfg;
  std::int64_t paths = -1;
  std::string seed_str;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo policy execution");
  sim->add_option("config", sim_cfg, "problem config file")->required();
  sim->add_option("--paths", paths, "override mc.n_paths");
  sim->add_option("--seed", seed_str, "override mc.seed");

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "run a packaged example (put, lookback, shepp, invest)");
  demo->add_option("name", demo_name, "demo name")->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed())
    return exstop::cli::cmd_solve(solve_cfg, out_dir, quiet, std::cout, std::cerr);

  if (sim->parsed()) {
    std::optional<std::int64_t> paths_opt;
    if (paths >= 0) paths_opt = paths;
    std::optional<std::uint64_t> seed_opt;
    if (!seed_str.empty()) {
      try {
        size_t pos = 0;
        seed_opt = std::stoull(seed_str, &pos);
        if (pos != seed_str.size()) throw std::invalid_argument(seed_str);
      } catch (const std::logic_error&) {
        std::cerr << "invalid seed token '" << seed_str << "'\n";
        return 2;
      }
    }
    return exstop::cli::cmd_simulate(sim_cfg, paths_opt, seed_opt, out_dir, quiet,
                                     std::cout, std::cerr);
  }

  return exstop::cli::cmd_demo(demo_name, quiet, std::cout, std::cerr);
}
