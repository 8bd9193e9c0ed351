#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bilctrl/model.hpp"
#include "bilctrl/solver.hpp"
#include "test_helpers.hpp"

using namespace bilctrl;

namespace {

// Heat equation with constant control c, f = 0, u0 = cos(x) + 2. Separation
// of variables: u(t,x) = 2 e^{ct} + e^{(c-1)t} cos(x).
double separable_heat(double c, double t, double x) {
  return 2.0 * std::exp(c * t) + std::exp((c - 1.0) * t) * std::cos(x);
}

ModelSpec zero_reaction_model(double T, double u0_off, double u0_amp) {
  ModelParams p;
  p.horizon = T;
  p.u0_offset = u0_off;
  p.u0_cos_amp = u0_amp;
  return make_pure_heat(p);
}

double max_error_separable(double c, int n, int n_steps, double T) {
  TorusGrid grid(n);
  TimeGrid tg(T, n_steps);
  ModelSpec model = zero_reaction_model(T, 2.0, 1.0);
  Field m(grid, c);
  SpaceTimeField u = solve_semilinear(model, m, tg);
  double err = 0.0;
  for (int j : {tg.n_steps() / 2, tg.n_steps()}) {
    const double t = tg.time(j);
    for (int i = 0; i < n; ++i) {
      err = std::max(err, std::abs(u.snapshot(j)[i] -
                                   separable_heat(c, t, grid.node(i))));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("constant-control heat equation matches separation of variables") {
  CHECK(max_error_separable(0.7, 64, 10000, 1.0) < 1e-6);
}

TEST_CASE("scheme converges at second order") {
  std::vector<double> errs;
  for (int n_steps : {250, 500, 1000, 2000}) {
    errs.push_back(max_error_separable(0.7, 64, n_steps, 1.0));
  }
  for (size_t i = 0; i + 1 < errs.size(); ++i) {
    CHECK(errs[i] / errs[i + 1] > 3.5);  // order >= 2 means ratio ~ 4
  }
}

TEST_CASE("u = 1 is stationary for m = 0, f = 0") {
  TorusGrid grid(32);
  TimeGrid tg(1.0, 100);
  ModelSpec model = zero_reaction_model(1.0, 1.0, 0.0);
  SpaceTimeField u = solve_semilinear(model, Field(grid, 0.0), tg);
  CHECK(std::abs(u.min_value() - 1.0) < 1e-13);
  CHECK(std::abs(u.max_value() - 1.0) < 1e-13);
}

TEST_CASE("uniform logistic equation follows the scalar ODE") {
  // m = 1, f = -u^2, u0 = 0.5: u(t) = e^t / (1 + e^t).
  TorusGrid grid(32);
  const double T = 1.0;
  TimeGrid tg(T, 10000);
  ModelParams p;
  p.horizon = T;
  p.u0_offset = 0.5;
  p.u0_cos_amp = 0.0;
  ModelSpec model = make_logistic_population(p);
  SpaceTimeField u = solve_semilinear(model, Field(grid, 1.0), tg);
  double err = 0.0;
  for (int j = 0; j <= tg.n_steps(); j += 500) {
    const double t = tg.time(j);
    const double want = std::exp(t) / (1.0 + std::exp(t));
    for (int i = 0; i < grid.n(); ++i) {
      err = std::max(err, std::abs(u.snapshot(j)[i] - want));
    }
  }
  CHECK(err < 1e-6);
}

TEST_CASE("state bounds hold for the logistic model") {
  TorusGrid grid(64);
  TimeGrid tg(1.0, 2000);
  ModelSpec model = make_logistic_population({1.0, 1.0, 0.5});
  SolveDiagnostics diag;
  SpaceTimeField u =
      solve_semilinear(model, Field(grid, 0.5), tg, &diag);
  CHECK(!diag.negative_state);
  StateBoundsReport rep = check_state_bounds(model, u);
  CHECK(rep.positive);
  CHECK(rep.bounded);
  CHECK(rep.upper_bound == doctest::Approx(1.5));
}

TEST_CASE("non-finite states are reported") {
  TorusGrid grid(32);
  TimeGrid tg(400.0, 400);  // dt = 1 with 50x growth: guaranteed overflow
  ModelSpec model = zero_reaction_model(400.0, 1.0, 0.0);
  CHECK_THROWS_AS(solve_semilinear(model, Field(grid, 50.0), tg),
                  NonFiniteState);
}

TEST_CASE("negative states are flagged") {
  TorusGrid grid(32);
  TimeGrid tg(1.0, 1000);
  ModelSpec model = zero_reaction_model(1.0, 0.1, 0.0);
  model.f = [](double, double, double) { return -1.0; };  // constant sink
  SolveDiagnostics diag;
  solve_semilinear(model, Field(grid, 0.0), tg, &diag);
  CHECK(diag.negative_state);
}

TEST_CASE("forced heat equation per-mode solution") {
  // V = 0, S = cos(kx), theta0 = 0: theta = (1 - e^{-k^2 t}) cos(kx) / k^2.
  TorusGrid grid(32);
  const double T = 0.5;
  TimeGrid tg(T, 25000);
  const int k = 2;
  SpaceTimeField V(tg, grid, 0.0);
  SpaceTimeField S = SpaceTimeField::constant_in_time(
      tg, Field::sample(grid, [&](double x) { return std::cos(k * x); }));
  SpaceTimeField theta =
      solve_linear(V, S, Field(grid, 0.0), TimeDirection::Forward);
  double err = 0.0;
  for (int j : {1, tg.n_steps() / 4, tg.n_steps()}) {
    const double t = tg.time(j);
    const double amp = -std::expm1(-k * k * t) / (k * k);
    for (int i = 0; i < grid.n(); ++i) {
      err = std::max(err, std::abs(theta.snapshot(j)[i] -
                                   amp * std::cos(k * grid.node(i))));
    }
  }
  CHECK(err < 1e-8);
}

TEST_CASE("zero source and zero data stay zero") {
  TorusGrid grid(32);
  TimeGrid tg(1.0, 50);
  SpaceTimeField V = SpaceTimeField::sample(
      tg, grid, [](double t, double x) { return std::sin(x + t); });
  SpaceTimeField S(tg, grid, 0.0);
  SpaceTimeField theta =
      solve_linear(V, S, Field(grid, 0.0), TimeDirection::Forward);
  CHECK(theta.max_value() == 0.0);
  CHECK(theta.min_value() == 0.0);
}

TEST_CASE("constant potential mode decay") {
  // V = c, S = 0, theta0 = cos(x): theta = e^{(c-1)t} cos(x).
  TorusGrid grid(32);
  const double c = 0.4;
  TimeGrid tg(1.0, 20000);
  SpaceTimeField V(tg, grid, c);
  SpaceTimeField S(tg, grid, 0.0);
  Field init = Field::sample(grid, [](double x) { return std::cos(x); });
  SpaceTimeField theta = solve_linear(V, S, init, TimeDirection::Forward);
  double err = 0.0;
  const double t = tg.horizon();
  for (int i = 0; i < grid.n(); ++i) {
    err = std::max(err, std::abs(theta.terminal()[i] -
                                 std::exp((c - 1.0) * t) *
                                     std::cos(grid.node(i))));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("backward direction implements the time-reversal substitution") {
  // dp/dt + p_xx + c p = 0, p(T) = cos(x) has p(t) = e^{(c-1)(T-t)} cos(x).
  TorusGrid grid(32);
  const double c = 0.4, T = 1.0;
  TimeGrid tg(T, 20000);
  SpaceTimeField V(tg, grid, c);
  SpaceTimeField S(tg, grid, 0.0);
  Field terminal = Field::sample(grid, [](double x) { return std::cos(x); });
  SpaceTimeField p = solve_linear(V, S, terminal, TimeDirection::Backward);
  double err = 0.0;
  for (int j : {0, tg.n_steps() / 2, tg.n_steps()}) {
    const double t = tg.time(j);
    for (int i = 0; i < grid.n(); ++i) {
      err = std::max(err, std::abs(p.snapshot(j)[i] -
                                   std::exp((c - 1.0) * (T - t)) *
                                       std::cos(grid.node(i))));
    }
  }
  CHECK(err < 1e-8);
}

TEST_CASE("energy estimate report") {
  TorusGrid grid(32);
  const double T = 1.0;

  SUBCASE("zero data gives zero lhs") {
    TimeGrid tg(T, 100);
    SpaceTimeField zero(tg, grid, 0.0);
    EnergyEstimateReport rep = energy_estimate_check(zero, zero, zero, zero);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.rhs_data == 0.0);
  }

  SUBCASE("ratio is stable under dt refinement") {
    std::vector<double> ratios;
    for (int n_steps : {2000, 4000}) {
      TimeGrid tg(T, n_steps);
      SpaceTimeField V(tg, grid, 0.0);
      SpaceTimeField f_src = SpaceTimeField::constant_in_time(
          tg, Field::sample(grid, [](double x) { return std::cos(x); }));
      SpaceTimeField zero(tg, grid, 0.0);
      EnergyEstimateReport rep = energy_estimate_check(V, f_src, zero, zero);
      CHECK(rep.lhs > 0.0);
      ratios.push_back(rep.lhs / rep.rhs_data);
    }
    CHECK(std::abs(ratios[0] - ratios[1]) < 0.1 * ratios[1]);
  }

  SUBCASE("doubling g scales quadratically") {
    TimeGrid tg(T, 2000);
    SpaceTimeField V(tg, grid, 0.2);
    SpaceTimeField zero(tg, grid, 0.0);
    SpaceTimeField q(tg, grid, 1.0);
    SpaceTimeField g = SpaceTimeField::constant_in_time(
        tg, Field::sample(grid, [](double x) { return std::sin(2 * x); }));
    SpaceTimeField g2 = SpaceTimeField::constant_in_time(
        tg, Field::sample(grid, [](double x) { return 2 * std::sin(2 * x); }));
    EnergyEstimateReport r1 = energy_estimate_check(V, zero, q, g);
    EnergyEstimateReport r2 = energy_estimate_check(V, zero, q, g2);
    CHECK(r2.rhs_data == doctest::Approx(4.0 * r1.rhs_data).epsilon(1e-12));
    CHECK(r2.lhs == doctest::Approx(4.0 * r1.lhs).epsilon(1e-10));
  }
}
