// Batch entry point: planner <mode> --config <path> [overrides]
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "urbanot/error.hpp"
#include "urbanot/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal resident/service planner"};
  std::string mode;
  std::string config_path;
  double p = 0.0;
  int grid = 0;
  int k_max = 0;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("mode", mode, "plan-rn | plan-bounded | mu-subproblem | energy-curve | validate")->required();
  app.add_option("--config", config_path, "JSON configuration file")->required();
  auto* p_opt = app.add_option("--p", p, "Transport cost exponent (>= 1)");
  auto* grid_opt = app.add_option("--grid", grid, "Grid cells per axis");
  auto* k_opt = app.add_option("--k-max", k_max, "Largest number of atoms to try");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized starts");
  auto* out_opt = app.add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    urbanot::RunConfig config = urbanot::load_config(config_path);
    config.mode = urbanot::parse_mode(mode);
    urbanot::Overrides o;
    if (*p_opt) o.p = p;
    if (*grid_opt) o.grid = grid;
    if (*k_opt) o.k_max = k_max;
    if (*seed_opt) o.seed = seed;
    if (*out_opt) o.out = out;
    urbanot::apply_overrides(config, o);
    return urbanot::run(config, std::cerr);
  } catch (const urbanot::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
