#include "bilctrl/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bilctrl {

namespace {

Field interaction_multiplier_field(const ModelSpec& model, const Field& u) {
  Field out = u;
  for (int j = 0; j < out.size(); ++j) {
    out[j] = model.interaction_multiplier(u[j]);
  }
  return out;
}

// Source snapshots h * mult(u) for the linearized state equation, dealiased.
SpaceTimeField linearized_source(const ModelSpec& model, const Field& h,
                                 const SpaceTimeField& u) {
  std::vector<Field> snaps;
  snaps.reserve(static_cast<size_t>(u.n_nodes()));
  for (int j = 0; j < u.n_nodes(); ++j) {
    snaps.push_back(dealiased_product(
        h, interaction_multiplier_field(model, u.snapshot(j))));
  }
  return SpaceTimeField(u.time_grid(), std::move(snaps));
}

}  // namespace

AdjointBundle solve_adjoint(const ModelSpec& model, const Field& m,
                            const SpaceTimeField& u) {
  const TorusGrid& grid = u.space_grid();
  const TimeGrid& tg = u.time_grid();

  SpaceTimeField V = potential_along_state(model, m, u);

  // -S = -dj1/du along the state; terminal datum dj2/du at u(T).
  std::vector<Field> src;
  src.reserve(static_cast<size_t>(tg.n_nodes()));
  for (int j = 0; j < tg.n_nodes(); ++j) {
    const double t = tg.time(j);
    Field s(grid);
    for (int i = 0; i < grid.n(); ++i) {
      s[i] = model.j1_u(t, grid.node(i), u.snapshot(j)[i]);
    }
    src.push_back(std::move(s));
  }
  Field terminal(grid);
  for (int i = 0; i < grid.n(); ++i) {
    terminal[i] = model.j2_u(grid.node(i), u.terminal()[i]);
  }

  SpaceTimeField p = solve_linear(V, SpaceTimeField(tg, std::move(src)),
                                  terminal, TimeDirection::Backward);

  std::vector<Field> psi_snaps;
  psi_snaps.reserve(static_cast<size_t>(tg.n_nodes()));
  for (int j = 0; j < tg.n_nodes(); ++j) {
    psi_snaps.push_back(pointwise_quotient(p.snapshot(j), u.snapshot(j)));
  }
  SpaceTimeField psi(tg, std::move(psi_snaps));

  SpaceTimeField weighted(tg, grid, 0.0);
  for (int j = 0; j < tg.n_nodes(); ++j) {
    weighted.snapshot(j) = pointwise_product(
        interaction_multiplier_field(model, u.snapshot(j)), p.snapshot(j));
  }
  Field density(grid, 0.0);
  const double dt = tg.dt();
  for (int j = 0; j < tg.n_nodes(); ++j) {
    const double w = (j == 0 || j == tg.n_steps()) ? 0.5 : 1.0;
    for (int i = 0; i < grid.n(); ++i) {
      density[i] += w * dt * weighted.snapshot(j)[i];
    }
  }

  return AdjointBundle{model, m,  u, std::move(p), std::move(V),
                       std::move(psi), std::move(density)};
}

SpaceTimeField solve_linearized_state(const AdjointBundle& bundle,
                                      const Field& h) {
  return solve_linear(bundle.potential,
                      linearized_source(bundle.model, h, bundle.u),
                      Field(bundle.u.space_grid(), 0.0),
                      TimeDirection::Forward);
}

FirstDerivative gateaux_first(const AdjointBundle& bundle, const Field& h) {
  const ModelSpec& model = bundle.model;
  const TorusGrid& grid = bundle.u.space_grid();
  SpaceTimeField u_dot = solve_linearized_state(bundle, h);

  FirstDerivative out;
  out.direct = time_trapezoid(u_dot, [&](int j, const Field& ud) {
    const double t = bundle.u.time_grid().time(j);
    double s = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
      s += model.j1_u(t, grid.node(i), bundle.u.snapshot(j)[i]) * ud[i];
    }
    return s * grid.spacing();
  });
  double terminal = 0.0;
  for (int i = 0; i < grid.n(); ++i) {
    terminal += model.j2_u(grid.node(i), bundle.u.terminal()[i]) *
                u_dot.terminal()[i];
  }
  out.direct += terminal * grid.spacing();
  out.adjoint = integral(pointwise_product(h, bundle.gradient_density));
  return out;
}

RearrangementFields assemble_rearrangement_fields(const AdjointBundle& bundle) {
  if (bundle.model.interaction != Interaction::Bilinear) {
    throw Error(
        "assemble_rearrangement_fields: the psi/Z rearrangement is defined "
        "for the bilinear interaction");
  }
  const ModelSpec& model = bundle.model;
  const TorusGrid& grid = bundle.u.space_grid();
  const TimeGrid& tg = bundle.u.time_grid();

  SpaceTimeField x_field(tg, grid, 0.0);
  SpaceTimeField y_field(tg, grid, 0.0);
  SpaceTimeField z_field(tg, grid, 0.0);

  for (int j = 0; j < tg.n_nodes(); ++j) {
    const double t = tg.time(j);
    const Field& u = bundle.u.snapshot(j);
    const Field& p = bundle.p.snapshot(j);
    const Field& psi = bundle.psi.snapshot(j);
    const Field& V = bundle.potential.snapshot(j);
    Field ux = spatial_derivative(u, 1);
    Field uxx = spatial_derivative(u, 2);
    Field px = spatial_derivative(p, 1);
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.node(i);
      const double psi_x = (px[i] - psi[i] * ux[i]) / u[i];
      const double X = -2.0 * (ux[i] / u[i]) * psi_x;
      const double f = model.f(t, x, u[i]);
      const double f_u = model.f_u(t, x, u[i]);
      const double f_uu = model.f_uu(t, x, u[i]);
      const double j1_u = model.j1_u(t, x, u[i]);
      const double j1_uu = model.j1_uu(t, x, u[i]);
      x_field.snapshot(j)[i] = X;
      y_field.snapshot(j)[i] = -psi[i] * V[i] + j1_uu + f_uu * p[i];
      z_field.snapshot(j)[i] = -X - psi[i] * f_u + j1_u / u[i] +
                               2.0 * psi[i] * uxx[i] / u[i] +
                               psi[i] * f / u[i] + j1_uu + f_uu * p[i];
    }
  }
  return RearrangementFields{std::move(x_field), std::move(y_field),
                             std::move(z_field)};
}

SecondDerivative gateaux_second(const AdjointBundle& bundle, const Field& h,
                                double fd_epsilon) {
  const ModelSpec& model = bundle.model;
  const TorusGrid& grid = bundle.u.space_grid();
  const TimeGrid& tg = bundle.u.time_grid();

  SecondDerivative out{.via_mb = {}, .via_pre = 0.0, .via_fd = 0.0,
                       .u_dot = solve_linearized_state(bundle, h)};
  const SpaceTimeField& ud = out.u_dot;

  // Pre-rearrangement adjoint form.
  const bool bilinear = model.interaction == Interaction::Bilinear;
  double cross = time_trapezoid(ud, [&](int j, const Field& udj) {
    const double t = tg.time(j);
    double s = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
      const double mult_d =
          bilinear ? 1.0 : model.phi_d(bundle.u.snapshot(j)[i]);
      (void)t;
      s += h[i] * mult_d * udj[i] * bundle.p.snapshot(j)[i];
    }
    return s * grid.spacing();
  });
  double curvature = time_trapezoid(ud, [&](int j, const Field& udj) {
    const double t = tg.time(j);
    double s = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.node(i);
      const double u = bundle.u.snapshot(j)[i];
      double w = model.j1_uu(t, x, u) +
                 model.f_uu(t, x, u) * bundle.p.snapshot(j)[i];
      if (!bilinear) {
        w += bundle.m[i] * model.phi_dd(u) * bundle.p.snapshot(j)[i];
      }
      s += w * udj[i] * udj[i];
    }
    return s * grid.spacing();
  });
  double terminal_j2 = 0.0;
  for (int i = 0; i < grid.n(); ++i) {
    const double udT = ud.terminal()[i];
    terminal_j2 +=
        model.j2_uu(grid.node(i), bundle.u.terminal()[i]) * udT * udT;
  }
  terminal_j2 *= grid.spacing();
  out.via_pre = 2.0 * cross + terminal_j2 + curvature;

  // Rearranged four-term form (bilinear models).
  if (bilinear) {
    RearrangementFields fields = assemble_rearrangement_fields(bundle);
    SecondOrderDecomposition d;
    d.term_terminal_j2 = terminal_j2;
    double psi_T = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
      const double udT = ud.terminal()[i];
      psi_T += bundle.psi.terminal()[i] * udT * udT;
    }
    d.term_terminal_psi = psi_T * grid.spacing();
    d.term_grad = 2.0 * time_trapezoid(ud, [&](int j, const Field& udj) {
      Field udx = spatial_derivative(udj, 1);
      double s = 0.0;
      for (int i = 0; i < grid.n(); ++i) {
        s += bundle.psi.snapshot(j)[i] * udx[i] * udx[i];
      }
      return s * grid.spacing();
    });
    d.term_z = time_trapezoid(ud, [&](int j, const Field& udj) {
      double s = 0.0;
      for (int i = 0; i < grid.n(); ++i) {
        s += fields.z_field.snapshot(j)[i] * udj[i] * udj[i];
      }
      return s * grid.spacing();
    });
    out.via_mb = d;
  }

  // Central second difference of the objective.
  auto objective_at = [&](double scale) {
    Field m_shift = bundle.m;
    for (int i = 0; i < grid.n(); ++i) m_shift[i] += scale * h[i];
    return evaluate_objective(model, solve_semilinear(model, m_shift, tg));
  };
  const double j0 = evaluate_objective(model, bundle.u);
  out.via_fd = (objective_at(fd_epsilon) - 2.0 * j0 +
                objective_at(-fd_epsilon)) /
               (fd_epsilon * fd_epsilon);
  return out;
}

CruiseReport cruise_terms(const AdjointBundle& bundle,
                          const SpaceTimeField& u_dot,
                          const SecondOrderDecomposition& decomp,
                          double eps_margin, double delta) {
  const TorusGrid& grid = bundle.u.space_grid();
  const TimeGrid& tg = bundle.u.time_grid();
  const double t_cut = tg.horizon() - eps_margin;

  CruiseReport rep;
  rep.eps_margin = eps_margin;
  rep.delta = delta;

  double psi_interior = std::numeric_limits<double>::infinity();
  double psi_tail = std::numeric_limits<double>::infinity();
  for (int j = 0; j < tg.n_nodes(); ++j) {
    const double mn = bundle.psi.snapshot(j).min_value();
    if (tg.time(j) <= t_cut + 1e-12) {
      psi_interior = std::min(psi_interior, mn);
    } else {
      psi_tail = std::min(psi_tail, mn);
    }
  }
  if (!std::isfinite(psi_tail)) psi_tail = psi_interior;
  rep.alpha_hat = psi_interior;

  auto grad_sq = [&](int, const Field& udj) {
    return h1_seminorm_sq(udj);
  };
  const double grad_total = time_trapezoid(u_dot, grad_sq);
  rep.grad_interior = time_trapezoid_until(u_dot, t_cut, grad_sq);
  rep.grad_tail = grad_total - rep.grad_interior;
  rep.l2_energy = time_trapezoid(
      u_dot, [](int, const Field& udj) { return l2_norm_sq(udj); });
  rep.terminal_energy = l2_norm_sq(u_dot.terminal());

  RearrangementFields fields = assemble_rearrangement_fields(bundle);
  double z_sup = 0.0;
  for (int j = 0; j < tg.n_nodes(); ++j) {
    z_sup = std::max(z_sup, fields.z_field.snapshot(j).sup_norm());
  }
  rep.z_sup = z_sup;
  double gamma = 0.0;
  for (int i = 0; i < grid.n(); ++i) {
    gamma = std::max(gamma, std::abs(bundle.model.j2_uu(
                                grid.node(i), bundle.u.terminal()[i])));
  }
  rep.j2_curvature_sup = gamma;

  const double psi_T_min = bundle.psi.terminal().min_value();
  rep.lower_bound = 2.0 * rep.alpha_hat * (1.0 - delta) * rep.grad_interior +
                    2.0 * std::min(0.0, psi_tail) * rep.grad_tail -
                    rep.z_sup * rep.l2_energy -
                    rep.j2_curvature_sup * rep.terminal_energy +
                    std::min(0.0, psi_T_min) * rep.terminal_energy;
  rep.second_derivative = decomp.total();
  rep.slack = rep.second_derivative - rep.lower_bound;
  return rep;
}

}  // namespace bilctrl
