#pragma once

#include "bilctrl/model.hpp"
#include "bilctrl/time_grid.hpp"
#include "bilctrl/torus.hpp"

namespace bilctrl {

/// Per-solve record of the state range; negative_state flags a dip below
/// -1e-10, which contradicts the discrete positivity expected of
/// hypothesis-compliant models.
struct SolveDiagnostics {
  double min_value = 0.0;
  double max_value = 0.0;
  bool negative_state = false;
};

/// Time direction for solve_linear. Forward solves
///   dtheta/dt - theta_xx - V theta = S,  theta(0) = init.
/// Backward solves the adjoint-form equation
///   dp/dt + p_xx + V p = -S,  p(T) = init,
/// by the substitution q(t) = p(T-t): V and S are time-reversed, the
/// equation is solved forward, and the result reversed.
enum class TimeDirection { Forward, Backward };

/// Semilinear state solve: du/dt = u_xx + m*u + f(t,x,u) (or m*phi(u) for
/// the phi interaction), u(0) = u0 sampled from the model. Diffusion is
/// advanced by its exact integrating factor exp(-k^2 dt); the reaction term
/// is advanced by explicit Heun with 2/3-dealiased products.
SpaceTimeField solve_semilinear(const ModelSpec& model, const Field& m,
                                const TimeGrid& tg,
                                SolveDiagnostics* diag = nullptr);

/// Linear solve with potential and source snapshots on matching grids.
SpaceTimeField solve_linear(const SpaceTimeField& potential,
                            const SpaceTimeField& source, const Field& init,
                            TimeDirection direction);

/// Potential V_m = d/du [m * interaction + f] along a computed state.
SpaceTimeField potential_along_state(const ModelSpec& model, const Field& m,
                                     const SpaceTimeField& u);

/// Energy estimate check for theta solving
/// dtheta/dt - theta_xx - V theta = d/dx f_src + q * g, theta(0) = 0:
/// lhs = iint |theta_x|^2 + iint theta^2 + int theta(T)^2 should be bounded
/// by a constant times rhs_data = iint (f_src^2 + g^2).
struct EnergyEstimateReport {
  double lhs = 0.0;
  double rhs_data = 0.0;
};

EnergyEstimateReport energy_estimate_check(const SpaceTimeField& potential,
                                           const SpaceTimeField& f_src,
                                           const SpaceTimeField& q,
                                           const SpaceTimeField& g);

/// State-bound diagnostics (discrete counterpart of the maximum-principle
/// bounds): positivity of the minimum and the sup bound from the model.
struct StateBoundsReport {
  double min_value = 0.0;
  double max_value = 0.0;
  double upper_bound = 0.0;  // model-declared a priori bound
  bool positive = false;
  bool bounded = false;
};

StateBoundsReport check_state_bounds(const ModelSpec& model,
                                     const SpaceTimeField& u);

}  // namespace bilctrl
