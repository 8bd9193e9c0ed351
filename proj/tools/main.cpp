#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "bilctrl/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bilctrl — bilinear parabolic optimal control experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "path to the JSON config")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* out_opt =
      run->add_option("--out", out_dir, "output directory override");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "seed override");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::string> out_override;
  if (out_opt->count() > 0) out_override = out_dir;
  std::optional<uint64_t> seed_override;
  if (seed_opt->count() > 0) seed_override = seed;
  return bilctrl::run_cli(config_path, out_override, seed_override);
}
