// dcons: run a switching-consensus experiment from a JSON config.
//
//   dcons run --config cfg.json [--out dir] [--only simulate|bounds|montecarlo]
//
// Exit status: 0 all checks passed, 1 a bound or monotonicity check failed,
// 2 the config was rejected (bad input or violated hypothesis).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dcons/dcons.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Switching-topology consensus experiments"};
  app.require_subcommand(1);

  std::string config_path;
  const char* env_out = std::getenv("DCONS_OUT_DIR");
  std::string out_dir = env_out ? env_out : "dcons_out";
  std::string only;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Run the analyses listed in a config file");
  run->add_option("-c,--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "Output directory (default: $DCONS_OUT_DIR or ./dcons_out)");
  run->add_option("--only", only, "Restrict to one analysis")
      ->check(CLI::IsMember({"simulate", "bounds", "montecarlo", "all"}));
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  CLI11_PARSE(app, argc, argv);

  try {
    const dcons::ExperimentConfig cfg = dcons::load_config(config_path);
    std::optional<std::set<dcons::Analysis>> restrict;
    if (!only.empty()) restrict = dcons::parse_analyses(only);
    const dcons::ExperimentOutcome out = dcons::run_experiment(cfg, out_dir, restrict);
    if (!quiet) std::cout << out.summary;
    return out.exit_code;
  } catch (const dcons::Error& ex) {
    std::cerr << "dcons: rejected: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "dcons: error: " << ex.what() << "\n";
    return 2;
  }
}
