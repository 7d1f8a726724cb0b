#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "zeroone/commands.hpp"
#include "zeroone/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary classification and zero-one laws for integral functionals of diffusions"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> horizon, tol;
  std::optional<std::string> out;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  for (const char* name : {"check", "classify", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--seed", seed, "simulation seed");
    sub->add_option("--paths", paths, "paths per sample");
    sub->add_option("--horizon", horizon, "simulation horizon");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--tol", tol, "quadrature tolerance");
    sub->add_option("--workers", workers, "simulation threads (does not change results)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  zeroone::cli::RunConfig cfg;
  try {
    cfg = zeroone::cli::load_config(config_path);
  } catch (const zeroone::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (seed) cfg.sim.seed = *seed;
  if (paths) cfg.sim.n_paths = *paths;
  if (horizon) cfg.sim.horizon = *horizon;
  if (tol) cfg.tol = *tol;
  if (out) cfg.out_dir = *out;
  return zeroone::cli::execute(command, cfg, workers, std::cout, std::cerr);
}
