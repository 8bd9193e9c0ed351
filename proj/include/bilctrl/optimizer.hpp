#pragma once

#include <vector>

#include "bilctrl/adjoint.hpp"
#include "bilctrl/model.hpp"

namespace bilctrl {

enum class StepRule { Fixed, Backtracking };

struct OptimizerConfig {
  int max_iters = 500;
  StepRule step_rule = StepRule::Backtracking;
  double step_size = 4.0;      // initial step, halved while backtracking
  int max_halvings = 30;
  double tolerance = 1e-8;     // on |m_{k+1} - m_k|_{L2}
  double delta_bb = 0.01;      // bang-bang threshold for trace reporting
  int n_steps = 1000;          // time resolution of the inner solves
};

struct IterationRecord {
  double objective = 0.0;
  double bang_bang_measure = 0.0;
  double step_size = 0.0;
  double step_norm = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  Control final_control;
  bool converged = false;
};

/// Projected-gradient ascent on the admissible set: m <- project(m + tau *
/// gradient_density). With backtracking the objective is non-decreasing
/// along the trace (up to 1e-12 relative); every iterate is admissible.
/// Throws StalledLineSearch if max_halvings fail to avoid a decrease.
RunTrace optimize(const ModelSpec& model, const Control& m_init,
                  const OptimizerConfig& cfg);

/// spacing * #{j : delta < m(x_j) < 1 - delta} — the measure of the set
/// where m is not within delta of an extreme value.
double bang_bang_measure(const Field& m, double delta_bb);

/// Bathtub misfit: compute the switching level c* whose superlevel set of
/// the gradient density has volume V0, and return the L1 mass of |m - m_hat|
/// over points whose gradient density is farther than tol_band from c*.
double pontryagin_residual(const ModelSpec& model, const Control& control,
                           int n_steps, double tol_band = 1e-8);

/// Same, reusing an existing adjoint bundle for the control.
double pontryagin_residual_from_density(const Field& gradient_density,
                                        const Control& control,
                                        double tol_band = 1e-8);

}  // namespace bilctrl
