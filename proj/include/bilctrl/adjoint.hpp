#pragma once

#include "bilctrl/model.hpp"
#include "bilctrl/solver.hpp"

namespace bilctrl {

/// State, adjoint and derived fields for one (model, control) pair.
/// psi = p/u pointwise; gradient_density g(x) = int_0^T mult(u) p dt with
/// mult(u) = u (bilinear) or phi(u), so that dJ(m)[h] = int h g dx.
struct AdjointBundle {
  ModelSpec model;
  Field m;
  SpaceTimeField u;
  SpaceTimeField p;
  SpaceTimeField potential;  // V_m along the state
  SpaceTimeField psi;        // p / u
  Field gradient_density;
};

/// Solve the backward adjoint equation
///   dp/dt + p_xx + V_m p = -dj1/du|_{u}, p(T) = dj2/du|_{u(T)}
/// and assemble the bundle. `u` must come from solve_semilinear with the
/// same model and control.
AdjointBundle solve_adjoint(const ModelSpec& model, const Field& m,
                            const SpaceTimeField& u);

/// First Gateaux derivative in the direction h, by both routes:
/// direct = iint dj1/du * udot + int dj2/du * udot(T) (udot from the
/// linearized equation), adjoint = int h * gradient_density. The two are
/// analytically equal; their discrete agreement is a solver test.
struct FirstDerivative {
  double direct = 0.0;
  double adjoint = 0.0;
};

FirstDerivative gateaux_first(const AdjointBundle& bundle, const Field& h);

/// Linearized state for the direction h (shared by both derivative orders).
SpaceTimeField solve_linearized_state(const AdjointBundle& bundle,
                                      const Field& h);

/// The four-term rearranged form of the second derivative. With the
/// pre-rearrangement identity
///   ddJ = 2 iint h udot p + int udot(T)^2 j2_uu + iint udot^2 (j1_uu + f_uu p)
/// substituting h = (L_V udot)/u and integrating by parts gives
///   ddJ = term_terminal_j2 + term_terminal_psi + term_grad + term_z
/// with
///   term_terminal_j2  = int udot(T)^2 j2_uu,
///   term_terminal_psi = int psi(T) udot(T)^2,
///   term_grad         = 2 iint psi |udot_x|^2,
///   term_z            = iint Z udot^2.
/// Z is assembled by replacing dp/dt + p_xx and du/dt + u_xx with the
/// equations' right-hand sides (no numerical time or second psi
/// derivatives):
///   Z = -X - psi f_u + j1_u/u + 2 psi u_xx/u + psi f/u + j1_uu + f_uu p,
///   X = -2 (u_x/u) psi_x,  psi_x = (p_x - psi u_x)/u.
struct SecondOrderDecomposition {
  double term_terminal_j2 = 0.0;
  double term_terminal_psi = 0.0;
  double term_grad = 0.0;
  double term_z = 0.0;

  double total() const {
    return term_terminal_j2 + term_terminal_psi + term_grad + term_z;
  }
};

/// Pointwise auxiliary fields of the rearrangement (X, Y, Z of the
/// decomposition; Y = -psi V + j1_uu + f_uu p).
struct RearrangementFields {
  SpaceTimeField x_field;
  SpaceTimeField y_field;
  SpaceTimeField z_field;
};

RearrangementFields assemble_rearrangement_fields(const AdjointBundle& bundle);

struct SecondDerivative {
  SecondOrderDecomposition via_mb;  // bilinear interaction only
  double via_pre = 0.0;
  double via_fd = 0.0;
  SpaceTimeField u_dot;
};

/// Second Gateaux derivative by three routes: the rearranged decomposition
/// (via_mb, bilinear models), the pre-rearrangement adjoint form (via_pre)
/// and a central second difference of J at step fd_epsilon (via_fd).
SecondDerivative gateaux_second(const AdjointBundle& bundle, const Field& h,
                                double fd_epsilon = 1e-3);

/// Measured ingredients of the second-derivative lower bound: alpha_hat =
/// inf psi over (0, T-eps] x T, the gradient/L2/terminal energies of udot,
/// the sup bounds standing in for the proof's constants, and the signed
/// slack of
///   ddJ >= 2 alpha_hat (1-delta) G_int + 2 min(0, inf_tail psi) G_tail
///          - sup|Z| L2 - sup|j2_uu| E_T - min(0, inf psi(T)) E_T.
struct CruiseReport {
  double eps_margin = 0.0;
  double delta = 0.0;
  double alpha_hat = 0.0;        // inf psi on the interior window
  double grad_interior = 0.0;    // iint_{(0,T-eps)} |udot_x|^2
  double grad_tail = 0.0;        // iint_{(T-eps,T)} |udot_x|^2
  double l2_energy = 0.0;        // iint udot^2
  double terminal_energy = 0.0;  // int udot(T)^2
  double z_sup = 0.0;            // sup |Z|
  double j2_curvature_sup = 0.0; // sup |j2_uu(u(T))|
  double lower_bound = 0.0;      // right-hand side of the inequality
  double second_derivative = 0.0;
  double slack = 0.0;            // second_derivative - lower_bound
};

CruiseReport cruise_terms(const AdjointBundle& bundle,
                          const SpaceTimeField& u_dot,
                          const SecondOrderDecomposition& decomp,
                          double eps_margin, double delta);

}  // namespace bilctrl
