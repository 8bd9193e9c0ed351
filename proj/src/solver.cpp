#include "bilctrl/solver.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace bilctrl {

namespace {

// Shared stepping core. One step of the integrating-factor Heun scheme for
//   du/dt = u_xx + N(t, u)
// in spectral space, with E_k = exp(-k^2 dt):
//   predictor: u* = E (u_n + dt N(t_n, u_n))
//   corrector: u_{n+1} = E u_n + dt/2 (E N(t_n, u_n) + N(t_{n+1}, u*)).
// The exact diffusion factor keeps the fast exp(-k^2 t) transients of the
// corrector studies resolved without a stability bound on dt from the
// stiff modes. The reaction term is evaluated on the dealias-truncated
// physical field and its spectrum truncated again, which is exactly the
// 2/3-rule product for the quadratic terms.
class HeunStepper {
 public:
  HeunStepper(TorusGrid grid, double dt)
      : grid_(grid), cutoff_(grid.dealias_cutoff()),
        decay_(static_cast<size_t>(grid.n() / 2 + 1)) {
    for (int k = 0; k <= grid.n() / 2; ++k) {
      decay_[static_cast<size_t>(k)] = std::exp(-double(k) * double(k) * dt);
    }
  }

  // N: (node index of the stage time, truncated physical field) -> reaction
  // field. Returns the snapshots including the initial one.
  template <typename ReactionFn>
  std::vector<Field> integrate(const Field& init, const TimeGrid& tg,
                               ReactionFn&& reaction) const {
    const double dt = tg.dt();
    std::vector<Field> snaps;
    snaps.reserve(static_cast<size_t>(tg.n_nodes()));
    snaps.push_back(init);

    SpectrumField u_hat = forward_transform(init);
    for (int step = 0; step < tg.n_steps(); ++step) {
      SpectrumField n1 = reaction_spectrum(step, u_hat, reaction);
      SpectrumField u_star = u_hat;
      for (int k = 0; k < u_star.n_modes(); ++k) {
        u_star.coeff(k) = decay_[static_cast<size_t>(k)] *
                          (u_hat.coeff(k) + dt * n1.coeff(k));
      }
      SpectrumField n2 = reaction_spectrum(step + 1, u_star, reaction);
      for (int k = 0; k < u_hat.n_modes(); ++k) {
        const double e = decay_[static_cast<size_t>(k)];
        u_hat.coeff(k) = e * u_hat.coeff(k) +
                         0.5 * dt * (e * n1.coeff(k) + n2.coeff(k));
      }
      Field u_phys = inverse_transform(u_hat);
      if (!u_phys.all_finite()) {
        throw NonFiniteState("solver: non-finite state at step " +
                             std::to_string(step + 1) +
                             " (time step too large?)");
      }
      snaps.push_back(std::move(u_phys));
    }
    return snaps;
  }

 private:
  template <typename ReactionFn>
  SpectrumField reaction_spectrum(int node, const SpectrumField& u_hat,
                                  ReactionFn&& reaction) const {
    SpectrumField trunc = u_hat;
    trunc.truncate_above(cutoff_);
    Field u_phys = inverse_transform(trunc);
    Field n = reaction(node, u_phys);
    SpectrumField n_hat = forward_transform(n);
    n_hat.truncate_above(cutoff_);
    return n_hat;
  }

  TorusGrid grid_;
  int cutoff_;
  std::vector<double> decay_;
};

Field truncated(const Field& f) {
  SpectrumField s = forward_transform(f);
  s.truncate_above(f.grid().dealias_cutoff());
  return inverse_transform(s);
}

}  // namespace

SpaceTimeField solve_semilinear(const ModelSpec& model, const Field& m,
                                const TimeGrid& tg, SolveDiagnostics* diag) {
  const TorusGrid& grid = m.grid();
  const Field u0 = model.sample_initial_datum(grid);
  const Field m_trunc = truncated(m);

  HeunStepper stepper(grid, tg.dt());
  auto reaction = [&](int node, const Field& u) {
    const double t = tg.time(node);
    Field out(grid);
    for (int j = 0; j < grid.n(); ++j) {
      out[j] = model.interaction_term(m_trunc[j], u[j]) +
               model.f(t, grid.node(j), u[j]);
    }
    return out;
  };
  SpaceTimeField u(tg, stepper.integrate(u0, tg, reaction));

  if (diag) {
    diag->min_value = u.min_value();
    diag->max_value = u.max_value();
    diag->negative_state = diag->min_value < -1e-10;
  }
  return u;
}

SpaceTimeField solve_linear(const SpaceTimeField& potential,
                            const SpaceTimeField& source, const Field& init,
                            TimeDirection direction) {
  if (!(potential.time_grid() == source.time_grid())) {
    throw Error("solve_linear: potential and source on different time grids");
  }
  if (direction == TimeDirection::Backward) {
    return solve_linear(potential.time_reversed(), source.time_reversed(),
                        init, TimeDirection::Forward)
        .time_reversed();
  }

  const TorusGrid& grid = init.grid();
  const TimeGrid& tg = potential.time_grid();
  const int cutoff = grid.dealias_cutoff();

  // Pre-truncate the snapshots once so each Heun stage is a plain pointwise
  // product of band-limited factors.
  std::vector<Field> v_trunc, s_trunc;
  v_trunc.reserve(static_cast<size_t>(tg.n_nodes()));
  s_trunc.reserve(static_cast<size_t>(tg.n_nodes()));
  for (int j = 0; j < tg.n_nodes(); ++j) {
    v_trunc.push_back(truncated(potential.snapshot(j)));
    SpectrumField s = forward_transform(source.snapshot(j));
    s.truncate_above(cutoff);
    s_trunc.push_back(inverse_transform(s));
  }

  HeunStepper stepper(grid, tg.dt());
  auto reaction = [&](int node, const Field& theta) {
    Field out = s_trunc[static_cast<size_t>(node)];
    const Field& v = v_trunc[static_cast<size_t>(node)];
    for (int j = 0; j < grid.n(); ++j) out[j] += v[j] * theta[j];
    return out;
  };
  return SpaceTimeField(tg, stepper.integrate(init, tg, reaction));
}

SpaceTimeField potential_along_state(const ModelSpec& model, const Field& m,
                                     const SpaceTimeField& u) {
  const TorusGrid& grid = u.space_grid();
  std::vector<Field> snaps;
  snaps.reserve(static_cast<size_t>(u.n_nodes()));
  for (int j = 0; j < u.n_nodes(); ++j) {
    const double t = u.time_grid().time(j);
    Field v(grid);
    for (int i = 0; i < grid.n(); ++i) {
      v[i] = model.potential(t, grid.node(i), m[i], u.snapshot(j)[i]);
    }
    snaps.push_back(std::move(v));
  }
  return SpaceTimeField(u.time_grid(), std::move(snaps));
}

EnergyEstimateReport energy_estimate_check(const SpaceTimeField& potential,
                                           const SpaceTimeField& f_src,
                                           const SpaceTimeField& q,
                                           const SpaceTimeField& g) {
  const TimeGrid& tg = potential.time_grid();
  const TorusGrid& grid = potential.space_grid();

  std::vector<Field> src;
  src.reserve(static_cast<size_t>(tg.n_nodes()));
  for (int j = 0; j < tg.n_nodes(); ++j) {
    Field s = spatial_derivative(f_src.snapshot(j), 1);
    s += dealiased_product(q.snapshot(j), g.snapshot(j));
    src.push_back(std::move(s));
  }
  SpaceTimeField theta = solve_linear(
      potential, SpaceTimeField(tg, std::move(src)), Field(grid, 0.0),
      TimeDirection::Forward);

  EnergyEstimateReport rep;
  rep.lhs = time_trapezoid(theta, [](int, const Field& th) {
    return h1_seminorm_sq(th) + l2_norm_sq(th);
  });
  rep.lhs += l2_norm_sq(theta.terminal());
  rep.rhs_data = time_trapezoid(f_src, [&](int j, const Field& fj) {
    return l2_norm_sq(fj) + l2_norm_sq(g.snapshot(j));
  });
  return rep;
}

StateBoundsReport check_state_bounds(const ModelSpec& model,
                                     const SpaceTimeField& u) {
  StateBoundsReport rep;
  rep.min_value = u.min_value();
  rep.max_value = u.max_value();
  rep.upper_bound = model.state_upper_bound(u.space_grid());
  rep.positive = rep.min_value > 0.0;
  rep.bounded = rep.max_value <= rep.upper_bound + 1e-6;
  return rep;
}

}  // namespace bilctrl
