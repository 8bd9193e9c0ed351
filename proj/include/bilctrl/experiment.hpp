#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bilctrl/model.hpp"
#include "bilctrl/optimizer.hpp"

namespace bilctrl {

enum class ExperimentKind {
  Solve,
  Optimize,
  DerivativeCheck,
  ExpansionStudy,
  BoundsCheck,
};

/// Flat JSON configuration with a "kind" discriminator. Unknown keys are
/// rejected so typos surface as ConfigError instead of silent defaults.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Solve;
  std::string model = "logistic-population";
  int n_points = 256;
  int n_steps = 1000;
  double horizon = 1.0;
  double volume = kTwoPi / 2.0;  // V0
  double u0_offset = 1.0;
  double u0_cos_amp = 0.5;
  std::vector<int> k_list = {4, 8, 16};
  uint64_t seed = 1;
  std::string out_dir = "out";

  // optimize
  int max_iters = 500;
  double step_size = 4.0;
  std::string step_rule = "backtracking";  // or "fixed"
  double tolerance = 1e-8;
  double delta_bb = 0.01;

  // derivative-check
  int n_directions = 10;

  // expansion-study
  std::string spectrum = "single-mode";  // or "omega-random"
  double eps_margin_factor = 0.1;        // eps = factor * T
  double slope_threshold = -2.5;

  // bounds-check
  std::vector<double> u0_offsets = {0.5, 1.0, 1.5};

  // solve
  std::vector<double> snapshot_times = {};  // empty = {0, T/2, T}

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string to_json_text() const;

  ModelParams model_params() const;
  void validate() const;
};

/// Everything one run emits: scalar metrics, per-invariant flags and the
/// list of files written. The JSON summary echoes the exact config.
struct ResultBundle {
  std::map<std::string, double> metrics;
  std::map<std::string, bool> checks;
  std::vector<std::string> files;

  bool all_checks_pass() const;
};

/// Execute the experiment and write the bundle under out_dir.
/// Numeric CSV cells are printed with 17 significant digits, C locale,
/// so identical config + seed reproduces byte-identical files.
ResultBundle run_experiment(const ExperimentConfig& config);

/// CLI entry: load config (optional out-dir/seed overrides), run, write
/// result.json. Returns 0 if all checks pass, 1 on invariant failure,
/// 2 on configuration errors.
int run_cli(const std::string& config_path,
            const std::optional<std::string>& out_override,
            const std::optional<uint64_t>& seed_override);

/// Fixed-format numeric emission (17 significant digits, '.' separator).
std::string format_numeric(double v);

}  // namespace bilctrl
