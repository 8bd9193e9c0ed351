#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bilctrl/time_grid.hpp"
#include "bilctrl/torus.hpp"

namespace bilctrl {

/// How the control enters the state equation.
enum class Interaction {
  Bilinear,  // m * u
  Phi,       // m * phi(u)
};

/// Which objective integrand carries the strict monotonicity of (H_J).
enum class MonotoneVia { J1, J2 };

using TXUFunction = std::function<double(double t, double x, double u)>;
using XUFunction = std::function<double(double x, double u)>;
using ScalarFunction = std::function<double(double u)>;

/// Full problem description: nonlinearity, interaction, objective integrands
/// and their partials, horizon and initial datum. All callables must be pure;
/// ModelSpec is immutable after construction and shareable across threads.
struct ModelSpec {
  std::string name;
  double horizon = 1.0;

  // Initial datum u0(x), strictly positive. Stored as a callable so the same
  // model can be sampled on any grid (mesh-refinement studies).
  std::function<double(double x)> initial_datum;

  TXUFunction f;     // nonlinearity f(t, x, u)
  TXUFunction f_u;   // d f / du
  TXUFunction f_uu;  // d^2 f / du^2

  Interaction interaction = Interaction::Bilinear;
  ScalarFunction phi;     // only for Interaction::Phi
  ScalarFunction phi_d;   // phi'
  ScalarFunction phi_dd;  // phi''

  TXUFunction j1, j1_u, j1_uu;
  XUFunction j2, j2_u, j2_uu;
  MonotoneVia monotone_via = MonotoneVia::J1;

  double lipschitz_bound = 0.0;      // A of (H3)
  std::optional<double> saturation;  // kappa of (H2); absent = no decay clause

  Field sample_initial_datum(const TorusGrid& grid) const;
  double initial_sup_norm(const TorusGrid& grid) const;

  /// m * u or m * phi(u), evaluated pointwise (dealiasing is the solver's
  /// concern).
  double interaction_term(double m, double u) const;
  /// Coefficient multiplying a control perturbation h in the linearized state
  /// equation: u for bilinear, phi(u) otherwise.
  double interaction_multiplier(double u) const;
  /// Potential of the linearized equations: d/du [m*interaction + f].
  double potential(double t, double x, double m, double u) const;

  /// A priori sup bound on the state: max{|u0|_inf, kappa} when (H2)'s decay
  /// clause is declared, otherwise the Gronwall envelope |u0|_inf *
  /// exp(T*(sup m + A)).
  double state_upper_bound(const TorusGrid& grid) const;
};

/// An admissible control: 0 <= m <= 1 pointwise with fixed mass V0.
struct Control {
  Field m;
  double volume;  // V0 in (0, 2*pi)

  /// Throws if the admissibility invariants fail (bounds within 1e-10,
  /// mass within 1e-9).
  void validate() const;
};

/// Exact L2 projection onto the admissible set: clip(raw + c, 0, 1) with the
/// scalar shift c found by bisection so the mass matches V0.
Control project_admissible(const Field& raw, double volume);

/// J(m) = iint j1(t, x, u) + int j2(x, u(T, .)), trapezoid in time and
/// rectangle rule in space.
double evaluate_objective(const ModelSpec& model, const SpaceTimeField& u);

/// Sampled hypothesis assertions: (H2)/(H3) for bilinear models, the
/// phi'/phi > 0 condition for m*phi(u) models, and (H_J) for the objective.
/// Samples a 64x64 (t, u) lattice up to u_max = max{|u0|_inf, kappa} + 1.
/// Throws HypothesisViolation on failure.
void verify_hypotheses(const ModelSpec& model, const TorusGrid& grid);

/// Named hypothesis-compliant models.
struct ModelParams {
  double horizon = 1.0;
  double u0_offset = 1.0;   // u0(x) = offset + amplitude * cos(x)
  double u0_cos_amp = 0.5;
};

ModelSpec make_logistic_population(const ModelParams& p = {});
ModelSpec make_pure_heat(const ModelParams& p = {});
ModelSpec make_carrying_capacity(const ModelParams& p = {});

std::vector<std::string> builtin_model_names();
ModelSpec make_builtin_model(const std::string& name, const ModelParams& p = {});

}  // namespace bilctrl
