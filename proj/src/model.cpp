#include "bilctrl/model.hpp"

#include <algorithm>
#include <cmath>

namespace bilctrl {

Field ModelSpec::sample_initial_datum(const TorusGrid& grid) const {
  Field u0 = Field::sample(grid, initial_datum);
  if (!(u0.min_value() > 0.0)) {
    throw HypothesisViolation("model '" + name +
                              "': initial datum must be strictly positive");
  }
  return u0;
}

double ModelSpec::initial_sup_norm(const TorusGrid& grid) const {
  return sample_initial_datum(grid).sup_norm();
}

double ModelSpec::interaction_term(double m, double u) const {
  return interaction == Interaction::Bilinear ? m * u : m * phi(u);
}

double ModelSpec::interaction_multiplier(double u) const {
  return interaction == Interaction::Bilinear ? u : phi(u);
}

double ModelSpec::potential(double t, double x, double m, double u) const {
  const double base = f_u(t, x, u);
  return interaction == Interaction::Bilinear ? m + base
                                              : m * phi_d(u) + base;
}

double ModelSpec::state_upper_bound(const TorusGrid& grid) const {
  const double u0_sup = initial_sup_norm(grid);
  if (saturation) return std::max(u0_sup, *saturation);
  return u0_sup * std::exp(horizon * (1.0 + lipschitz_bound));
}

void Control::validate() const {
  if (m.min_value() < -1e-10 || m.max_value() > 1.0 + 1e-10) {
    throw Error("Control: values outside [0, 1] beyond tolerance");
  }
  if (std::abs(integral(m) - volume) > 1e-9) {
    throw Error("Control: mass deviates from V0 beyond tolerance");
  }
}

Control project_admissible(const Field& raw, double volume) {
  if (!(volume > 0.0) || !(volume < kTwoPi)) {
    throw InfeasibleVolume("project_admissible: V0 must lie in (0, 2*pi)");
  }
  const auto mass = [&](double c) {
    double s = 0.0;
    for (int j = 0; j < raw.size(); ++j) {
      s += std::clamp(raw[j] + c, 0.0, 1.0);
    }
    return s * raw.grid().spacing() - volume;
  };
  // mass(c) is continuous and nondecreasing; bracket then bisect.
  double lo = -raw.max_value();           // everything clips to 0
  double hi = 1.0 - raw.min_value();      // everything clips to 1
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double v = mass(mid);
    if (std::abs(v) <= 1e-11) break;
    (v < 0.0 ? lo : hi) = mid;
  }
  Field out = raw;
  for (int j = 0; j < out.size(); ++j) {
    out[j] = std::clamp(raw[j] + mid, 0.0, 1.0);
  }
  Control c{std::move(out), volume};
  c.validate();
  return c;
}

double evaluate_objective(const ModelSpec& model, const SpaceTimeField& u) {
  const TorusGrid& grid = u.space_grid();
  const double running = time_trapezoid(u, [&](int j, const Field& uj) {
    const double t = u.time_grid().time(j);
    double s = 0.0;
    for (int i = 0; i < uj.size(); ++i) s += model.j1(t, grid.node(i), uj[i]);
    return s * grid.spacing();
  });
  double terminal = 0.0;
  const Field& uT = u.terminal();
  for (int i = 0; i < uT.size(); ++i) {
    terminal += model.j2(grid.node(i), uT[i]);
  }
  return running + terminal * grid.spacing();
}

namespace {

void fail(const std::string& model, const std::string& what) {
  throw HypothesisViolation("model '" + model + "': " + what);
}

}  // namespace

void verify_hypotheses(const ModelSpec& model, const TorusGrid& grid) {
  const int kSamples = 64;
  const double u0_sup = model.initial_sup_norm(grid);
  const double u_max = std::max(u0_sup, model.saturation.value_or(0.0)) + 1.0;
  const double T = model.horizon;
  const double x_probe = grid.node(grid.n() / 3);

  for (int it = 0; it < kSamples; ++it) {
    const double t = T * (it + 0.5) / kSamples;
    // f(., ., 0) >= 0
    if (model.f(t, x_probe, 0.0) < 0.0) fail(model.name, "(H2) f(.,.,0) < 0");
    bool j1_positive_seen = false;
    bool j2_positive_seen = false;
    for (int iu = 0; iu < kSamples; ++iu) {
      const double u = u_max * (iu + 1.0) / kSamples;  // (0, u_max]
      // (H3): Lipschitz in u, checked through the declared bound on df/du.
      if (std::abs(model.f_u(t, x_probe, u)) > model.lipschitz_bound + 1e-9) {
        fail(model.name, "(H3) |df/du| exceeds the declared Lipschitz bound");
      }
      // (H2) decay clause, only meaningful when a saturation level exists.
      if (model.saturation && u >= *model.saturation &&
          model.f(t, x_probe, u) > -u + 1e-9) {
        fail(model.name, "(H2) f(t,x,u) <= -u fails beyond the saturation level");
      }
      // (H_J): both j-partials nonnegative on u > 0, the declared one strict.
      const double dj1 = model.j1_u(t, x_probe, u);
      const double dj2 = model.j2_u(x_probe, u);
      if (dj1 < -1e-12) fail(model.name, "(H_J) dj1/du < 0 on u > 0");
      if (dj2 < -1e-12) fail(model.name, "(H_J) dj2/du < 0 on u > 0");
      j1_positive_seen = j1_positive_seen || dj1 > 0.0;
      j2_positive_seen = j2_positive_seen || dj2 > 0.0;
      if (model.interaction == Interaction::Phi) {
        const double p = model.phi(u);
        const double pd = model.phi_d(u);
        if (p == 0.0 || pd / p <= 0.0) {
          fail(model.name, "phi'/phi must be positive on (0, u_max]");
        }
      }
    }
    if (model.monotone_via == MonotoneVia::J1 && !j1_positive_seen) {
      fail(model.name, "(H_J) declared dj1/du > 0 not observed");
    }
    if (model.monotone_via == MonotoneVia::J2 && !j2_positive_seen) {
      fail(model.name, "(H_J) declared dj2/du > 0 not observed");
    }
  }
}

namespace {

// Globally Lipschitz extension of u -> -u^2: unchanged on [0, M+1]
// (M = max{|u0|_inf, 1}), linear with slope -2(M+1) beyond, zero below 0.
// The cubic Hermite blend on [M, M+1] towards slope -A with A = 2(M+1)
// reproduces -u^2 exactly, so the junction is C^1 at both ends and
// f(u) <= -u keeps holding past the saturation level kappa = 1.
struct LogisticExtension {
  double edge;  // M + 1

  double value(double u) const {
    if (u <= 0.0) return 0.0;
    if (u <= edge) return -u * u;
    return -edge * edge - 2.0 * edge * (u - edge);
  }
  double deriv(double u) const {
    if (u <= 0.0) return 0.0;
    if (u <= edge) return -2.0 * u;
    return -2.0 * edge;
  }
  double deriv2(double u) const { return (u <= 0.0 || u > edge) ? 0.0 : -2.0; }
};

std::function<double(double)> cosine_datum(const ModelParams& p) {
  const double off = p.u0_offset;
  const double amp = p.u0_cos_amp;
  if (!(off - std::abs(amp) > 0.0)) {
    throw HypothesisViolation("initial datum parameters give min u0 <= 0");
  }
  return [off, amp](double x) { return off + amp * std::cos(x); };
}

}  // namespace

ModelSpec make_logistic_population(const ModelParams& p) {
  ModelSpec m;
  m.name = "logistic-population";
  m.horizon = p.horizon;
  m.initial_datum = cosine_datum(p);
  const double u0_sup = p.u0_offset + std::abs(p.u0_cos_amp);
  const LogisticExtension ext{std::max(u0_sup, 1.0) + 1.0};
  m.f = [ext](double, double, double u) { return ext.value(u); };
  m.f_u = [ext](double, double, double u) { return ext.deriv(u); };
  m.f_uu = [ext](double, double, double u) { return ext.deriv2(u); };
  m.j1 = [](double, double, double u) { return u; };
  m.j1_u = [](double, double, double) { return 1.0; };
  m.j1_uu = [](double, double, double) { return 0.0; };
  m.j2 = [](double, double u) { return u; };
  m.j2_u = [](double, double) { return 1.0; };
  m.j2_uu = [](double, double) { return 0.0; };
  m.monotone_via = MonotoneVia::J1;
  m.lipschitz_bound = 2.0 * ext.edge;
  m.saturation = 1.0;
  return m;
}

ModelSpec make_pure_heat(const ModelParams& p) {
  ModelSpec m;
  m.name = "pure-heat";
  m.horizon = p.horizon;
  m.initial_datum = cosine_datum(p);
  m.f = [](double, double, double) { return 0.0; };
  m.f_u = [](double, double, double) { return 0.0; };
  m.f_uu = [](double, double, double) { return 0.0; };
  m.j1 = [](double, double, double) { return 0.0; };
  m.j1_u = [](double, double, double) { return 0.0; };
  m.j1_uu = [](double, double, double) { return 0.0; };
  m.j2 = [](double, double u) { return u; };
  m.j2_u = [](double, double) { return 1.0; };
  m.j2_uu = [](double, double) { return 0.0; };
  m.monotone_via = MonotoneVia::J2;
  m.lipschitz_bound = 0.0;
  m.saturation = std::nullopt;  // f = 0 has no (H2) decay clause
  return m;
}

ModelSpec make_carrying_capacity(const ModelParams& p) {
  ModelSpec m;
  m.name = "carrying-capacity";
  m.horizon = p.horizon;
  m.initial_datum = cosine_datum(p);
  m.interaction = Interaction::Phi;
  // State equation: dy/dt - y_xx = y + m * (-y^2) = y (1 - m y).
  m.f = [](double, double, double u) { return u; };
  m.f_u = [](double, double, double) { return 1.0; };
  m.f_uu = [](double, double, double) { return 0.0; };
  m.phi = [](double u) { return -u * u; };
  m.phi_d = [](double u) { return -2.0 * u; };
  m.phi_dd = [](double) { return -2.0; };
  m.j1 = [](double, double, double) { return 0.0; };
  m.j1_u = [](double, double, double) { return 0.0; };
  m.j1_uu = [](double, double, double) { return 0.0; };
  m.j2 = [](double, double u) { return u; };
  m.j2_u = [](double, double) { return 1.0; };
  m.j2_uu = [](double, double) { return 0.0; };
  m.monotone_via = MonotoneVia::J2;
  m.lipschitz_bound = 1.0;
  m.saturation = std::nullopt;
  return m;
}

std::vector<std::string> builtin_model_names() {
  return {"logistic-population", "pure-heat", "carrying-capacity"};
}

ModelSpec make_builtin_model(const std::string& name, const ModelParams& p) {
  if (name == "logistic-population") return make_logistic_population(p);
  if (name == "pure-heat") return make_pure_heat(p);
  if (name == "carrying-capacity") return make_carrying_capacity(p);
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace bilctrl
