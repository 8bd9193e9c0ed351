#include "bilctrl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace bilctrl {

namespace {

double step_norm_l2(const Field& a, const Field& b) {
  double s = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s * a.grid().spacing());
}

Field shifted(const Field& m, const Field& g, double tau) {
  Field out = m;
  for (int j = 0; j < out.size(); ++j) out[j] += tau * g[j];
  return out;
}

}  // namespace

RunTrace optimize(const ModelSpec& model, const Control& m_init,
                  const OptimizerConfig& cfg) {
  m_init.validate();
  const TimeGrid tg(model.horizon, cfg.n_steps);

  Control current = m_init;
  SpaceTimeField u = solve_semilinear(model, current.m, tg);
  double objective = evaluate_objective(model, u);

  RunTrace trace{{}, current, false};
  trace.iterations.reserve(static_cast<size_t>(cfg.max_iters));

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    AdjointBundle bundle = solve_adjoint(model, current.m, u);
    const Field& g = bundle.gradient_density;

    Control next = current;
    SpaceTimeField u_next = u;
    double obj_next = objective;
    double tau = cfg.step_size;

    if (cfg.step_rule == StepRule::Fixed) {
      next = project_admissible(shifted(current.m, g, tau), current.volume);
      u_next = solve_semilinear(model, next.m, tg);
      obj_next = evaluate_objective(model, u_next);
    } else {
      bool accepted = false;
      for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
        Control trial =
            project_admissible(shifted(current.m, g, tau), current.volume);
        SpaceTimeField u_trial = solve_semilinear(model, trial.m, tg);
        const double obj_trial = evaluate_objective(model, u_trial);
        if (obj_trial >= objective - 1e-12 * (1.0 + std::abs(objective))) {
          next = std::move(trial);
          u_next = std::move(u_trial);
          obj_next = obj_trial;
          accepted = true;
          break;
        }
        tau *= 0.5;
      }
      if (!accepted) {
        throw StalledLineSearch(
            "optimize: no objective increase after " +
            std::to_string(cfg.max_halvings) +
            " halvings (stationary point or discretization too coarse)");
      }
    }

    const double moved = step_norm_l2(next.m, current.m);
    current = std::move(next);
    u = std::move(u_next);
    objective = obj_next;
    trace.iterations.push_back(IterationRecord{
        objective, bang_bang_measure(current.m, cfg.delta_bb), tau, moved});

    if (moved <= cfg.tolerance) {
      trace.converged = true;
      break;
    }
  }

  trace.final_control = current;
  trace.final_control.validate();
  return trace;
}

double bang_bang_measure(const Field& m, double delta_bb) {
  int count = 0;
  for (int j = 0; j < m.size(); ++j) {
    if (m[j] > delta_bb && m[j] < 1.0 - delta_bb) ++count;
  }
  return count * m.grid().spacing();
}

double pontryagin_residual_from_density(const Field& gradient_density,
                                        const Control& control,
                                        double tol_band) {
  const Field& g = gradient_density;
  const int n = g.size();
  const double spacing = g.grid().spacing();

  // Switching level: the r-th largest density value, r matching the volume.
  int rank = static_cast<int>(std::llround(control.volume / spacing));
  rank = std::clamp(rank, 0, n);
  std::vector<double> sorted(g.values());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // With rank 0 every point should be off; use +inf as the level then.
  const double level = rank == 0 ? std::numeric_limits<double>::infinity()
                                 : sorted[static_cast<size_t>(rank - 1)];

  double residual = 0.0;
  for (int j = 0; j < n; ++j) {
    if (std::abs(g[j] - level) <= tol_band) continue;  // tie band
    const double m_hat = g[j] > level ? 1.0 : 0.0;
    residual += std::abs(control.m[j] - m_hat);
  }
  return residual * spacing;
}

double pontryagin_residual(const ModelSpec& model, const Control& control,
                           int n_steps, double tol_band) {
  const TimeGrid tg(model.horizon, n_steps);
  SpaceTimeField u = solve_semilinear(model, control.m, tg);
  AdjointBundle bundle = solve_adjoint(model, control.m, u);
  return pontryagin_residual_from_density(bundle.gradient_density, control,
                                          tol_band);
}

}  // namespace bilctrl
