#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bilctrl/model.hpp"
#include "bilctrl/solver.hpp"
#include "test_helpers.hpp"

using namespace bilctrl;
using bilctrl::test::random_field;

namespace {

// Independent 1-D oracle for the projection shift: golden-section search on
// F(c)^2 where F(c) = int clip(raw + c, 0, 1) - V0.
double golden_section_shift(const Field& raw, double volume) {
  auto mass_gap = [&](double c) {
    double s = 0.0;
    for (int j = 0; j < raw.size(); ++j) {
      s += std::clamp(raw[j] + c, 0.0, 1.0);
    }
    return s * raw.grid().spacing() - volume;
  };
  double lo = -raw.max_value(), hi = 1.0 - raw.min_value();
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  for (int it = 0; it < 300; ++it) {
    if (std::abs(mass_gap(c)) < std::abs(mass_gap(d))) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("projection leaves admissible fields unchanged") {
  TorusGrid g(64);
  Control c = project_admissible(Field(g, 0.5), kTwoPi / 2.0);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(c.m[j] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("projection shifts constants") {
  TorusGrid g(64);
  Control c = project_admissible(Field(g, 0.8), kTwoPi / 2.0);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(c.m[j] == doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("projection clips and matches the golden-section oracle") {
  TorusGrid g(128);
  Field raw = Field::sample(g, [](double x) { return 2.0 * std::cos(x) + 0.5; });
  const double volume = kTwoPi / 2.0;
  Control c = project_admissible(raw, volume);
  CHECK(c.m.min_value() == 0.0);
  CHECK(c.m.max_value() == 1.0);
  CHECK(std::abs(integral(c.m) - volume) < 1e-10);

  const double shift = golden_section_shift(raw, volume);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(c.m[j] ==
          doctest::Approx(std::clamp(raw[j] + shift, 0.0, 1.0)).epsilon(1e-7));
  }
}

TEST_CASE("projection is idempotent") {
  TorusGrid g(64);
  for (uint64_t seed : {1u, 2u, 3u}) {
    Field raw = random_field(g, seed, 12);
    Control once = project_admissible(raw, 2.0);
    Control twice = project_admissible(once.m, 2.0);
    for (int j = 0; j < g.n(); ++j) {
      CHECK(std::abs(twice.m[j] - once.m[j]) < 1e-12);
    }
  }
}

TEST_CASE("projection is the nearest admissible point") {
  TorusGrid g(64);
  Field raw = random_field(g, 9, 10);
  const double volume = 2.5;
  Control proj = project_admissible(raw, volume);
  double dist_proj = 0.0;
  for (int j = 0; j < g.n(); ++j) {
    dist_proj += (proj.m[j] - raw[j]) * (proj.m[j] - raw[j]);
  }
  for (uint64_t seed = 100; seed < 200; ++seed) {
    Control q = project_admissible(random_field(g, seed, 15), volume);
    double dist_q = 0.0;
    for (int j = 0; j < g.n(); ++j) {
      dist_q += (q.m[j] - raw[j]) * (q.m[j] - raw[j]);
    }
    CHECK(dist_proj <= dist_q + 1e-12);
  }
}

TEST_CASE("infeasible volumes are rejected") {
  TorusGrid g(32);
  Field raw(g, 0.5);
  CHECK_THROWS_AS(project_admissible(raw, 0.0), InfeasibleVolume);
  CHECK_THROWS_AS(project_admissible(raw, kTwoPi), InfeasibleVolume);
  CHECK_THROWS_AS(project_admissible(raw, -1.0), InfeasibleVolume);
  CHECK_THROWS_AS(project_admissible(raw, 7.0), InfeasibleVolume);
}

TEST_CASE("objective quadrature") {
  TorusGrid g(64);
  TimeGrid tg(1.0, 10);

  SUBCASE("j1 = u, j2 = u, u = 1 gives 4*pi") {
    ModelSpec m = make_logistic_population();  // j1 = u, j2 = u
    SpaceTimeField u(tg, g, 1.0);
    CHECK(evaluate_objective(m, u) == doctest::Approx(2 * kTwoPi).epsilon(1e-12));
  }

  SUBCASE("terminal-only quadratic") {
    ModelSpec m = make_pure_heat();
    m.j2 = [](double, double u) { return u * u; };
    SpaceTimeField u = SpaceTimeField::constant_in_time(
        tg, Field::sample(g, [](double x) { return std::cos(x); }));
    CHECK(evaluate_objective(m, u) ==
          doctest::Approx(kTwoPi / 2.0).epsilon(1e-12));
  }

  SUBCASE("tracking objective vanishes on target") {
    ModelSpec m = make_pure_heat();
    m.j2 = [](double x, double u) {
      const double ref = 2.0 + std::sin(x);
      return -(u - ref) * (u - ref);
    };
    SpaceTimeField u = SpaceTimeField::constant_in_time(
        tg, Field::sample(g, [](double x) { return 2.0 + std::sin(x); }));
    m.j1 = [](double, double, double) { return 0.0; };
    CHECK(std::abs(evaluate_objective(m, u)) < 1e-12);
  }
}

TEST_CASE("logistic extension agrees with -u^2 and is C1") {
  ModelParams p;
  p.u0_offset = 1.0;
  p.u0_cos_amp = 0.5;  // |u0|_inf = 1.5, M = 1.5, edge = 2.5
  ModelSpec m = make_logistic_population(p);
  const double edge = 2.5;

  for (double u = 0.0; u <= edge; u += 0.1) {
    CHECK(m.f(0, 0, u) == doctest::Approx(-u * u).epsilon(1e-14));
  }
  // C1 junction at the edge: finite differences across it stay consistent.
  const double eps = 1e-6;
  const double slope_below = (m.f(0, 0, edge) - m.f(0, 0, edge - eps)) / eps;
  const double slope_above = (m.f(0, 0, edge + eps) - m.f(0, 0, edge)) / eps;
  CHECK(slope_below == doctest::Approx(slope_above).epsilon(1e-4));
  // (H2) decay beyond the saturation level kappa = 1.
  for (double u = 1.0; u < 10.0; u += 0.25) {
    CHECK(m.f(0, 0, u) <= -u + 1e-12);
  }
  // (H3) global Lipschitz bound.
  for (double u = -5.0; u < 10.0; u += 0.1) {
    CHECK(std::abs(m.f_u(0, 0, u)) <= m.lipschitz_bound + 1e-12);
  }
}

TEST_CASE("catalog models pass their hypothesis checks") {
  TorusGrid g(64);
  for (const std::string& name : builtin_model_names()) {
    ModelSpec m = make_builtin_model(name);
    CHECK_NOTHROW(verify_hypotheses(m, g));
  }
  CHECK_THROWS_AS(make_builtin_model("no-such-model"), ConfigError);
}

TEST_CASE("hypothesis violations are caught") {
  TorusGrid g(64);

  SUBCASE("decreasing j1") {
    ModelSpec m = make_logistic_population();
    m.j1_u = [](double, double, double) { return -1.0; };
    CHECK_THROWS_AS(verify_hypotheses(m, g), HypothesisViolation);
  }
  SUBCASE("f(.,.,0) < 0") {
    ModelSpec m = make_pure_heat();
    m.f = [](double, double, double) { return -0.5; };
    CHECK_THROWS_AS(verify_hypotheses(m, g), HypothesisViolation);
  }
  SUBCASE("understated Lipschitz bound") {
    ModelSpec m = make_logistic_population();
    m.lipschitz_bound = 0.1;
    CHECK_THROWS_AS(verify_hypotheses(m, g), HypothesisViolation);
  }
  SUBCASE("declared strict monotonicity missing") {
    ModelSpec m = make_pure_heat();
    m.j2_u = [](double, double) { return 0.0; };
    CHECK_THROWS_AS(verify_hypotheses(m, g), HypothesisViolation);
  }
  SUBCASE("phi with the wrong sign ratio") {
    ModelSpec m = make_carrying_capacity();
    m.phi_d = [](double u) { return 2.0 * u; };  // phi'/phi < 0 now
    CHECK_THROWS_AS(verify_hypotheses(m, g), HypothesisViolation);
  }
}

TEST_CASE("carrying-capacity model solves its logistic variant") {
  // dy/dt = y (1 - m y) with m = 1 uniform and flat y0 follows the scalar
  // ODE toward carrying capacity 1.
  TorusGrid g(32);
  TimeGrid tg(2.0, 4000);
  ModelParams p;
  p.horizon = 2.0;
  p.u0_offset = 0.5;
  p.u0_cos_amp = 0.0;
  ModelSpec m = make_carrying_capacity(p);
  SpaceTimeField y = solve_semilinear(m, Field(g, 1.0), tg);
  const double t = tg.horizon();
  const double want = std::exp(t) / (1.0 + std::exp(t));  // logistic from 0.5
  CHECK(y.terminal()[0] == doctest::Approx(want).epsilon(1e-6));
  CHECK(y.min_value() > 0.0);
}
