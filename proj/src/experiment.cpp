#include "bilctrl/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bilctrl/adjoint.hpp"
#include "bilctrl/solver.hpp"
#include "bilctrl/twoscale.hpp"

namespace bilctrl {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_numeric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

namespace {

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> names = {
      {"solve", ExperimentKind::Solve},
      {"optimize", ExperimentKind::Optimize},
      {"derivative-check", ExperimentKind::DerivativeCheck},
      {"expansion-study", ExperimentKind::ExpansionStudy},
      {"bounds-check", ExperimentKind::BoundsCheck},
  };
  return names;
}

std::string kind_to_string(ExperimentKind k) {
  for (const auto& [name, kind] : kind_names()) {
    if (kind == k) return name;
  }
  return "solve";
}

template <typename T>
void read_key(const ordered_json& j, const std::string& key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

// Smooth random direction with modes <= n/6, normalized to unit L2.
Field random_direction(const TorusGrid& grid, uint64_t seed) {
  std::mt19937_64 eng(seed);
  auto draw = [&] { return double(eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  Field h(grid, 0.0);
  const int k_max = std::max(2, grid.n() / 6);
  for (int k = 0; k <= k_max; ++k) {
    const double a = draw();
    const double b = (k == 0) ? 0.0 : draw();
    for (int j = 0; j < grid.n(); ++j) {
      const double x = grid.node(j);
      h[j] += a * std::cos(k * x) + b * std::sin(k * x);
    }
  }
  const double norm = std::sqrt(l2_norm_sq(h));
  h *= 1.0 / norm;
  return h;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header,
            std::vector<std::string>* files)
      : out_(path) {
    if (!out_) throw Error("cannot open '" + path.string() + "' for writing");
    out_ << header << "\n";
    files->push_back(path.filename().string());
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ",";
      out_ << format_numeric(values[i]);
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  static const std::vector<std::string> known = {
      "kind", "model", "n_points", "n_steps", "horizon", "volume",
      "u0_offset", "u0_cos_amp", "k_list", "seed", "out_dir", "max_iters",
      "step_size", "step_rule", "tolerance", "delta_bb", "n_directions",
      "spectrum", "eps_margin_factor", "slope_threshold", "u0_offsets",
      "snapshot_times"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  std::string kind = kind_to_string(cfg.kind);
  read_key(j, "kind", kind);
  auto it = kind_names().find(kind);
  if (it == kind_names().end()) {
    throw ConfigError("config field 'kind': unknown experiment '" + kind + "'");
  }
  cfg.kind = it->second;
  read_key(j, "model", cfg.model);
  read_key(j, "n_points", cfg.n_points);
  read_key(j, "n_steps", cfg.n_steps);
  read_key(j, "horizon", cfg.horizon);
  read_key(j, "volume", cfg.volume);
  read_key(j, "u0_offset", cfg.u0_offset);
  read_key(j, "u0_cos_amp", cfg.u0_cos_amp);
  read_key(j, "k_list", cfg.k_list);
  read_key(j, "seed", cfg.seed);
  read_key(j, "out_dir", cfg.out_dir);
  read_key(j, "max_iters", cfg.max_iters);
  read_key(j, "step_size", cfg.step_size);
  read_key(j, "step_rule", cfg.step_rule);
  read_key(j, "tolerance", cfg.tolerance);
  read_key(j, "delta_bb", cfg.delta_bb);
  read_key(j, "n_directions", cfg.n_directions);
  read_key(j, "spectrum", cfg.spectrum);
  read_key(j, "eps_margin_factor", cfg.eps_margin_factor);
  read_key(j, "slope_threshold", cfg.slope_threshold);
  read_key(j, "u0_offsets", cfg.u0_offsets);
  read_key(j, "snapshot_times", cfg.snapshot_times);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  ordered_json j;
  j["kind"] = kind_to_string(kind);
  j["model"] = model;
  j["n_points"] = n_points;
  j["n_steps"] = n_steps;
  j["horizon"] = horizon;
  j["volume"] = volume;
  j["u0_offset"] = u0_offset;
  j["u0_cos_amp"] = u0_cos_amp;
  j["k_list"] = k_list;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["max_iters"] = max_iters;
  j["step_size"] = step_size;
  j["step_rule"] = step_rule;
  j["tolerance"] = tolerance;
  j["delta_bb"] = delta_bb;
  j["n_directions"] = n_directions;
  j["spectrum"] = spectrum;
  j["eps_margin_factor"] = eps_margin_factor;
  j["slope_threshold"] = slope_threshold;
  j["u0_offsets"] = u0_offsets;
  j["snapshot_times"] = snapshot_times;
  return j.dump(2);
}

ModelParams ExperimentConfig::model_params() const {
  return ModelParams{horizon, u0_offset, u0_cos_amp};
}

void ExperimentConfig::validate() const {
  const auto bad = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  const auto names = builtin_model_names();
  if (std::find(names.begin(), names.end(), model) == names.end()) {
    bad("model", "unknown model '" + model + "'");
  }
  if (n_points < 8 || n_points % 2 != 0) bad("n_points", "must be even, >= 8");
  if (n_steps < 1) bad("n_steps", "must be >= 1");
  if (!(horizon > 0.0)) bad("horizon", "must be positive");
  if (!(volume > 0.0) || !(volume < kTwoPi)) bad("volume", "must be in (0, 2*pi)");
  if (!(u0_offset - std::abs(u0_cos_amp) > 0.0)) {
    bad("u0_offset", "initial datum must stay strictly positive");
  }
  if (!(delta_bb > 0.0) || !(delta_bb < 0.5)) bad("delta_bb", "must be in (0, 0.5)");
  if (max_iters < 1) bad("max_iters", "must be >= 1");
  if (!(step_size > 0.0)) bad("step_size", "must be positive");
  if (!(tolerance > 0.0)) bad("tolerance", "must be positive");
  if (step_rule != "fixed" && step_rule != "backtracking") {
    bad("step_rule", "must be 'fixed' or 'backtracking'");
  }
  if (n_directions < 1) bad("n_directions", "must be >= 1");
  if (spectrum != "single-mode" && spectrum != "omega-random") {
    bad("spectrum", "must be 'single-mode' or 'omega-random'");
  }
  if (!(eps_margin_factor > 0.0) || !(eps_margin_factor < 1.0)) {
    bad("eps_margin_factor", "must be in (0, 1)");
  }
  const int cutoff = TorusGrid(n_points).dealias_cutoff();
  if (kind == ExperimentKind::ExpansionStudy) {
    if (k_list.empty()) bad("k_list", "must not be empty");
    for (int k : k_list) {
      if (k < 1 || k > cutoff) {
        bad("k_list", "modes must lie in [1, n/3); got " + std::to_string(k));
      }
    }
  }
  if (kind == ExperimentKind::BoundsCheck) {
    if (u0_offsets.empty()) bad("u0_offsets", "must not be empty");
    for (double off : u0_offsets) {
      if (!(off - std::abs(u0_cos_amp) > 0.0)) {
        bad("u0_offsets", "every offset must keep the initial datum positive");
      }
    }
  }
  for (double t : snapshot_times) {
    if (t < 0.0 || t > horizon) bad("snapshot_times", "times must lie in [0, T]");
  }
}

bool ResultBundle::all_checks_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const auto& kv) { return kv.second; });
}

namespace {

void run_solve(const ExperimentConfig& cfg, const fs::path& dir,
               ResultBundle& bundle) {
  const TorusGrid grid(cfg.n_points);
  const TimeGrid tg(cfg.horizon, cfg.n_steps);
  ModelSpec model = make_builtin_model(cfg.model, cfg.model_params());
  verify_hypotheses(model, grid);
  Control m = project_admissible(Field(grid, cfg.volume / kTwoPi), cfg.volume);

  SolveDiagnostics diag;
  SpaceTimeField u = solve_semilinear(model, m.m, tg, &diag);
  StateBoundsReport rep = check_state_bounds(model, u);

  std::vector<double> times = cfg.snapshot_times;
  if (times.empty()) times = {0.0, cfg.horizon / 2.0, cfg.horizon};

  CsvWriter csv(dir / "state.csv", "x,time,u", &bundle.files);
  for (double t : times) {
    const int j = std::clamp(
        static_cast<int>(std::llround(t / tg.dt())), 0, tg.n_steps());
    for (int i = 0; i < grid.n(); ++i) {
      csv.row({grid.node(i), tg.time(j), u.snapshot(j)[i]});
    }
  }

  bundle.metrics["objective"] = evaluate_objective(model, u);
  bundle.metrics["state_min"] = rep.min_value;
  bundle.metrics["state_max"] = rep.max_value;
  bundle.metrics["state_upper_bound"] = rep.upper_bound;
  bundle.checks["state_positive"] = rep.positive;
  bundle.checks["state_bounded"] = rep.bounded;
  bundle.checks["no_negative_state"] = !diag.negative_state;
}

void run_bounds_check(const ExperimentConfig& cfg, const fs::path& dir,
                      ResultBundle& bundle) {
  const TorusGrid grid(cfg.n_points);
  const TimeGrid tg(cfg.horizon, cfg.n_steps);
  CsvWriter csv(dir / "bounds.csv", "u0_offset,state_min,state_max,upper_bound",
                &bundle.files);
  bool all_positive = true;
  bool all_bounded = true;
  for (double off : cfg.u0_offsets) {
    ModelParams params = cfg.model_params();
    params.u0_offset = off;
    ModelSpec model = make_builtin_model(cfg.model, params);
    verify_hypotheses(model, grid);
    Control m =
        project_admissible(Field(grid, cfg.volume / kTwoPi), cfg.volume);
    SpaceTimeField u = solve_semilinear(model, m.m, tg);
    StateBoundsReport rep = check_state_bounds(model, u);
    csv.row({off, rep.min_value, rep.max_value, rep.upper_bound});
    all_positive = all_positive && rep.positive;
    all_bounded = all_bounded && rep.bounded;
  }
  bundle.checks["state_positive"] = all_positive;
  bundle.checks["state_bounded"] = all_bounded;
}

void run_derivative_check(const ExperimentConfig& cfg, const fs::path& dir,
                          ResultBundle& bundle) {
  const TorusGrid grid(cfg.n_points);
  const TimeGrid tg(cfg.horizon, cfg.n_steps);
  ModelSpec model = make_builtin_model(cfg.model, cfg.model_params());
  verify_hypotheses(model, grid);
  Control m = project_admissible(Field(grid, cfg.volume / kTwoPi), cfg.volume);

  SpaceTimeField u = solve_semilinear(model, m.m, tg);
  AdjointBundle adjoint = solve_adjoint(model, m.m, u);
  const double j0 = evaluate_objective(model, u);

  const double fd_eps = 1e-4;
  double max_rel_fd = 0.0;
  double max_rel_direct = 0.0;
  CsvWriter csv(dir / "derivs.csv",
                "direction,adjoint,direct,central_fd,rel_fd,rel_direct",
                &bundle.files);
  for (int d = 0; d < cfg.n_directions; ++d) {
    Field h = random_direction(grid, cfg.seed + static_cast<uint64_t>(d));
    FirstDerivative fd = gateaux_first(adjoint, h);
    auto objective_at = [&](double scale) {
      Field shifted = m.m;
      for (int i = 0; i < grid.n(); ++i) shifted[i] += scale * h[i];
      return evaluate_objective(model, solve_semilinear(model, shifted, tg));
    };
    const double central =
        (objective_at(fd_eps) - objective_at(-fd_eps)) / (2.0 * fd_eps);
    const double rel_fd =
        std::abs(fd.adjoint - central) / (1.0 + std::abs(fd.adjoint));
    const double rel_direct = std::abs(fd.direct - fd.adjoint) /
                              std::max(1e-300, std::abs(fd.direct));
    max_rel_fd = std::max(max_rel_fd, rel_fd);
    max_rel_direct = std::max(max_rel_direct, rel_direct);
    csv.row({double(d), fd.adjoint, fd.direct, central, rel_fd, rel_direct});
  }

  bundle.metrics["objective"] = j0;
  bundle.metrics["max_rel_gradient_mismatch"] = max_rel_fd;
  bundle.metrics["max_rel_direct_vs_adjoint"] = max_rel_direct;
  bundle.checks["gradient_matches_fd"] = max_rel_fd < 1e-5;
  bundle.checks["direct_matches_adjoint"] = max_rel_direct < 1e-6;

  if (model.interaction == Interaction::Bilinear) {
    Field h = random_direction(grid, cfg.seed + 1000);
    SecondDerivative sd = gateaux_second(adjoint, h);
    const double rel_mb = std::abs(sd.via_mb.total() - sd.via_pre) /
                          std::max(1e-300, std::abs(sd.via_pre));
    const double rel_fd2 = std::abs(sd.via_pre - sd.via_fd) /
                           std::max(1e-300, std::abs(sd.via_fd));
    bundle.metrics["second_mb_vs_pre"] = rel_mb;
    bundle.metrics["second_pre_vs_fd"] = rel_fd2;
    bundle.checks["second_identity"] = rel_mb < 1e-4;
    bundle.checks["second_matches_fd"] = rel_fd2 < 1e-3;
  }
}

void run_expansion_study(const ExperimentConfig& cfg, const fs::path& dir,
                         ResultBundle& bundle) {
  const TorusGrid grid(cfg.n_points);
  ModelSpec model = make_builtin_model(cfg.model, cfg.model_params());
  verify_hypotheses(model, grid);
  Control m = project_admissible(Field(grid, cfg.volume / kTwoPi), cfg.volume);

  std::vector<PerturbationSpectrum> specs;
  for (int k : cfg.k_list) {
    if (cfg.spectrum == "single-mode") {
      specs.push_back(PerturbationSpectrum::single_mode(grid, k));
    } else {
      std::vector<uint8_t> mask(static_cast<size_t>(grid.n()), 0);
      for (int j = 0; j < grid.n() / 2; ++j) mask[static_cast<size_t>(j)] = 1;
      specs.push_back(build_high_mode_perturbation(grid, mask, k, cfg.seed));
    }
  }
  const double eps = cfg.eps_margin_factor * cfg.horizon;
  ScalingReport report = residual_study(model, m.m, specs, eps);

  CsvWriter csv(dir / "scaling.csv",
                "K,residual_energy,envelope,L2_LK,ratio_IJ_over_L,slope",
                &bundle.files);
  for (const ResidualStudyEntry& e : report.entries) {
    csv.row({double(e.k_min), e.residual_energy, e.envelope, e.lk_sq,
             e.lk_sq > 0.0 ? e.ij_sq / e.lk_sq : 0.0, report.slope});
  }
  CsvWriter plot(dir / "scaling_loglog.csv", "log_K,log_residual_energy",
                 &bundle.files);
  for (const ResidualStudyEntry& e : report.entries) {
    plot.row({std::log(double(e.k_min)),
              std::log(std::max(e.residual_energy, 1e-300))});
  }

  bundle.metrics["slope"] = report.slope;
  if (report.entries.size() >= 2 && cfg.spectrum == "single-mode") {
    bundle.checks["slope_within_threshold"] = report.slope <= cfg.slope_threshold;
  }
  bool decreasing = true;
  for (size_t i = 0; i + 1 < report.entries.size(); ++i) {
    decreasing = decreasing && report.entries[i + 1].residual_energy <
                                   report.entries[i].residual_energy;
  }
  if (report.entries.size() >= 2) {
    bundle.checks["residual_decreasing_in_K"] = decreasing;
  }
}

void run_optimize(const ExperimentConfig& cfg, const fs::path& dir,
                  ResultBundle& bundle) {
  const TorusGrid grid(cfg.n_points);
  ModelSpec model = make_builtin_model(cfg.model, cfg.model_params());
  verify_hypotheses(model, grid);
  Control init = project_admissible(Field(grid, cfg.volume / kTwoPi), cfg.volume);

  OptimizerConfig opt;
  opt.max_iters = cfg.max_iters;
  opt.step_rule =
      cfg.step_rule == "fixed" ? StepRule::Fixed : StepRule::Backtracking;
  opt.step_size = cfg.step_size;
  opt.tolerance = cfg.tolerance;
  opt.delta_bb = cfg.delta_bb;
  opt.n_steps = cfg.n_steps;

  RunTrace trace = optimize(model, init, opt);

  CsvWriter tcsv(dir / "trace.csv", "iteration,objective,bang_bang_measure,step_size",
                 &bundle.files);
  bool monotone = true;
  for (size_t i = 0; i < trace.iterations.size(); ++i) {
    const IterationRecord& r = trace.iterations[i];
    tcsv.row({double(i), r.objective, r.bang_bang_measure, r.step_size});
    if (i > 0) {
      monotone = monotone &&
                 r.objective >= trace.iterations[i - 1].objective -
                                    1e-12 * (1.0 + std::abs(r.objective));
    }
  }
  CsvWriter ccsv(dir / "control.csv", "x,m", &bundle.files);
  for (int i = 0; i < grid.n(); ++i) {
    ccsv.row({grid.node(i), trace.final_control.m[i]});
  }

  const double bb = bang_bang_measure(trace.final_control.m, cfg.delta_bb);
  const double residual =
      pontryagin_residual(model, trace.final_control, cfg.n_steps);
  bundle.metrics["final_objective"] = trace.iterations.empty()
                                          ? 0.0
                                          : trace.iterations.back().objective;
  bundle.metrics["iterations"] = double(trace.iterations.size());
  bundle.metrics["bang_bang_measure"] = bb;
  bundle.metrics["pontryagin_residual"] = residual;
  bundle.checks["converged"] = trace.converged;
  bundle.checks["objective_monotone"] =
      monotone || opt.step_rule == StepRule::Fixed;
  bundle.checks["final_control_admissible"] = [&] {
    try {
      trace.final_control.validate();
      return true;
    } catch (const Error&) {
      return false;
    }
  }();
}

}  // namespace

ResultBundle run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  ResultBundle bundle;
  switch (cfg.kind) {
    case ExperimentKind::Solve:
      run_solve(cfg, dir, bundle);
      break;
    case ExperimentKind::BoundsCheck:
      run_bounds_check(cfg, dir, bundle);
      break;
    case ExperimentKind::DerivativeCheck:
      run_derivative_check(cfg, dir, bundle);
      break;
    case ExperimentKind::ExpansionStudy:
      run_expansion_study(cfg, dir, bundle);
      break;
    case ExperimentKind::Optimize:
      run_optimize(cfg, dir, bundle);
      break;
  }

  ordered_json result;
  result["config"] = ordered_json::parse(cfg.to_json_text());
  ordered_json metrics;
  for (const auto& [key, value] : bundle.metrics) metrics[key] = value;
  result["metrics"] = metrics;
  ordered_json checks;
  for (const auto& [key, value] : bundle.checks) checks[key] = value;
  result["checks"] = checks;
  result["files"] = bundle.files;
  std::ofstream out(dir / "result.json");
  out << result.dump(2) << "\n";
  bundle.files.push_back("result.json");
  return bundle;
}

int run_cli(const std::string& config_path,
            const std::optional<std::string>& out_override,
            const std::optional<uint64_t>& seed_override) {
  try {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (const char* env = std::getenv("BILCTRL_OUT_DIR")) cfg.out_dir = env;
    if (out_override) cfg.out_dir = *out_override;
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();
    ResultBundle bundle = run_experiment(cfg);
    return bundle.all_checks_pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace bilctrl
