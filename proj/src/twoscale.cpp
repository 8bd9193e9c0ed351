#include "bilctrl/twoscale.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace bilctrl {

namespace {

double window_sum(const PerturbationSpectrum& s, int power) {
  double acc = 0.0;
  for (int k = s.k_min; k <= s.k_max; ++k) {
    acc += (s.a[static_cast<size_t>(k)] * s.a[static_cast<size_t>(k)] +
            s.b[static_cast<size_t>(k)] * s.b[static_cast<size_t>(k)]) /
           std::pow(double(k), power);
  }
  return acc;
}

}  // namespace

double PerturbationSpectrum::window_mass() const {
  double acc = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    acc += a[static_cast<size_t>(k)] * a[static_cast<size_t>(k)] +
           b[static_cast<size_t>(k)] * b[static_cast<size_t>(k)];
  }
  return acc;
}

PerturbationSpectrum PerturbationSpectrum::single_mode(const TorusGrid& grid,
                                                       int k) {
  if (k < 1 || k > grid.dealias_cutoff()) {
    throw Error("single_mode: k must lie in [1, n/3)");
  }
  std::vector<double> a(static_cast<size_t>(k) + 1, 0.0);
  std::vector<double> b(static_cast<size_t>(k) + 1, 0.0);
  a[static_cast<size_t>(k)] = 1.0;
  Field h = Field::sample(grid, [k](double x) { return std::cos(k * x); });
  return PerturbationSpectrum{grid,
                              k,
                              k,
                              std::move(a),
                              std::move(b),
                              std::vector<uint8_t>(static_cast<size_t>(grid.n()), 1),
                              std::move(h)};
}

PerturbationSpectrum PerturbationSpectrum::from_coefficients(
    const TorusGrid& grid, int k_min, std::vector<double> a,
    std::vector<double> b, bool normalize) {
  const int k_max = static_cast<int>(a.size()) - 1;
  if (k_max > grid.dealias_cutoff()) {
    throw Error("from_coefficients: window exceeds the dealias cutoff");
  }
  if (b.size() != a.size()) throw Error("from_coefficients: a/b size mismatch");
  PerturbationSpectrum spec{grid,
                            k_min,
                            k_max,
                            std::move(a),
                            std::move(b),
                            std::vector<uint8_t>(static_cast<size_t>(grid.n()), 1),
                            Field(grid, 0.0)};
  if (normalize) {
    const double mass = spec.window_mass();
    if (mass > 0.0) {
      const double scale = 1.0 / std::sqrt(mass);
      for (double& v : spec.a) v *= scale;
      for (double& v : spec.b) v *= scale;
    }
  }
  Field h(grid, 0.0);
  for (int k = spec.k_min; k <= spec.k_max; ++k) {
    const double ak = spec.a[static_cast<size_t>(k)];
    const double bk = spec.b[static_cast<size_t>(k)];
    if (ak == 0.0 && bk == 0.0) continue;
    for (int j = 0; j < grid.n(); ++j) {
      const double x = grid.node(j);
      h[j] += ak * std::cos(k * x) + bk * std::sin(k * x);
    }
  }
  spec.h = std::move(h);
  return spec;
}

PerturbationSpectrum build_high_mode_perturbation(
    const TorusGrid& grid, const std::vector<uint8_t>& omega_mask, int K,
    uint64_t seed) {
  const int n = grid.n();
  if (static_cast<int>(omega_mask.size()) != n) {
    throw Error("build_high_mode_perturbation: mask size mismatch");
  }
  if (K < 1) throw Error("build_high_mode_perturbation: K must be >= 1");

  std::vector<int> support;
  for (int j = 0; j < n; ++j) {
    if (omega_mask[static_cast<size_t>(j)]) support.push_back(j);
  }
  const int rows = static_cast<int>(support.size());
  if (rows < 4 * K) {
    throw DegenerateSupport(
        "build_high_mode_perturbation: support has " + std::to_string(rows) +
        " points, need at least " + std::to_string(4 * K) + " for K = " +
        std::to_string(K));
  }

  // Seeded draw on the support; raw mt19937_64 bits keep this
  // platform-independent.
  std::mt19937_64 eng(seed);
  Eigen::VectorXd draw(rows);
  for (int r = 0; r < rows; ++r) {
    draw(r) = double(eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }

  // Restricted trigonometric basis: cos(kx), k < K, and sin(kx), 1 <= k < K.
  const int cols = 2 * K - 1;
  Eigen::MatrixXd basis(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double x = grid.node(support[static_cast<size_t>(r)]);
    basis(r, 0) = 1.0;
    for (int k = 1; k < K; ++k) {
      basis(r, 2 * k - 1) = std::cos(k * x);
      basis(r, 2 * k) = std::sin(k * x);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    throw DegenerateSupport(
        "build_high_mode_perturbation: restricted basis is rank-deficient "
        "(support too small for K = " + std::to_string(K) + ")");
  }
  Eigen::VectorXd residual = draw - basis * qr.solve(draw);

  Field h(grid, 0.0);
  for (int r = 0; r < rows; ++r) {
    h[support[static_cast<size_t>(r)]] = residual(r);
  }

  const int k_max = grid.dealias_cutoff();
  SpectrumField s = forward_transform(h);
  PerturbationSpectrum spec{grid,
                            K,
                            k_max,
                            std::vector<double>(static_cast<size_t>(k_max) + 1, 0.0),
                            std::vector<double>(static_cast<size_t>(k_max) + 1, 0.0),
                            omega_mask,
                            Field(grid, 0.0)};
  for (int k = K; k <= k_max; ++k) {
    spec.a[static_cast<size_t>(k)] = s.a(k);
    spec.b[static_cast<size_t>(k)] = s.b(k);
  }
  const double mass = spec.window_mass();
  if (!(mass > 1e-20)) {
    throw DegenerateSupport(
        "build_high_mode_perturbation: deflation left no retained mass");
  }
  const double scale = 1.0 / std::sqrt(mass);
  for (double& v : spec.a) v *= scale;
  for (double& v : spec.b) v *= scale;
  h *= scale;
  spec.h = std::move(h);

  // Verify the low-mode annihilation the construction promises.
  SpectrumField check = forward_transform(spec.h);
  for (int k = 0; k < K; ++k) {
    if (std::abs(check.coeff(k)) > 1e-8) {
      throw DegenerateSupport(
          "build_high_mode_perturbation: low-mode residual above tolerance");
    }
  }
  return spec;
}

double corrector_profile(double s) {
  return -std::expm1(-s) - s * std::exp(-s);
}

CorrectorExpansion corrector_fields(const SpaceTimeField& u,
                                    const PerturbationSpectrum& spec) {
  const TorusGrid& grid = u.space_grid();
  const TimeGrid& tg = u.time_grid();
  if (spec.k_max >= grid.n() / 2) {
    throw Error("corrector_fields: spectrum exceeds the resolvable band");
  }

  // Trig tables for the active modes.
  struct Mode {
    int k;
    double a, b;
    std::vector<double> cos_kx, sin_kx;
  };
  std::vector<Mode> modes;
  for (int k = spec.k_min; k <= spec.k_max; ++k) {
    const double ak = spec.a[static_cast<size_t>(k)];
    const double bk = spec.b[static_cast<size_t>(k)];
    if (ak == 0.0 && bk == 0.0) continue;
    Mode m{k, ak, bk, {}, {}};
    m.cos_kx.resize(static_cast<size_t>(grid.n()));
    m.sin_kx.resize(static_cast<size_t>(grid.n()));
    for (int j = 0; j < grid.n(); ++j) {
      m.cos_kx[static_cast<size_t>(j)] = std::cos(k * grid.node(j));
      m.sin_kx[static_cast<size_t>(j)] = std::sin(k * grid.node(j));
    }
    modes.push_back(std::move(m));
  }

  CorrectorExpansion out{SpaceTimeField(tg, grid, 0.0),
                         SpaceTimeField(tg, grid, 0.0),
                         SpaceTimeField(tg, grid, 0.0),
                         SpaceTimeField(tg, grid, 0.0),
                         SpaceTimeField(tg, grid, 0.0)};

  for (int jt = 0; jt < tg.n_nodes(); ++jt) {
    const double t = tg.time(jt);
    const Field& uj = u.snapshot(jt);
    const Field ux = spatial_derivative(uj, 1);
    const Field uxx = spatial_derivative(uj, 2);
    Field& z = out.z.snapshot(jt);
    Field& l = out.l.snapshot(jt);
    Field& i_f = out.i.snapshot(jt);
    Field& j_f = out.j.snapshot(jt);
    Field& w = out.w.snapshot(jt);

    for (const Mode& m : modes) {
      const double k = m.k;
      const double s = k * k * t;
      const double rise = -std::expm1(-s);  // 1 - e^{-s}
      const double phi = corrector_profile(s);
      const double decay = std::exp(-s);
      const double i_profile = -1.0 + decay + 2.0 * s * decay;
      const double inv_k = 1.0 / k;
      const double inv_k2 = inv_k * inv_k;
      const double inv_k3 = inv_k2 * inv_k;
      for (int j = 0; j < grid.n(); ++j) {
        const double ck = m.cos_kx[static_cast<size_t>(j)];
        const double sk = m.sin_kx[static_cast<size_t>(j)];
        z[j] += m.a * (uj[j] * ck * rise * inv_k2 -
                       2.0 * ux[j] * sk * phi * inv_k3) +
                m.b * (uj[j] * sk * rise * inv_k2 +
                       2.0 * ux[j] * ck * phi * inv_k3);
        l[j] += uj[j] * (-m.a * sk + m.b * ck) * inv_k * rise;
        i_f[j] += ux[j] * (m.a * ck + m.b * sk) * inv_k2 * i_profile;
        const double w_term = (m.a * sk - m.b * ck) * inv_k3 * phi;
        w[j] += w_term;
        j_f[j] += -2.0 * uxx[j] * w_term;
      }
    }
  }
  return out;
}

namespace {

double interior_energy(const SpaceTimeField& f, const SpaceTimeField& g,
                       double t_upper) {
  return time_trapezoid_until(f, t_upper, [&](int j, const Field& fj) {
    double s = 0.0;
    for (int i = 0; i < fj.size(); ++i) {
      const double v = fj[i] + g.snapshot(j)[i];
      s += v * v;
    }
    return s * fj.grid().spacing();
  });
}

}  // namespace

ScalingReport residual_study(const ModelSpec& model, const Field& m,
                             const std::vector<PerturbationSpectrum>& specs,
                             double eps_margin, int n_steps_override) {
  const TorusGrid& grid = m.grid();
  ScalingReport report;

  for (const PerturbationSpectrum& spec : specs) {
    const double guard = 0.25 / (double(spec.k_max) * double(spec.k_max));
    int n_steps = n_steps_override;
    if (n_steps <= 0) {
      const double dt = std::min(model.horizon * 1e-3, guard);
      n_steps = static_cast<int>(std::ceil(model.horizon / dt));
    } else if (model.horizon / n_steps > guard) {
      throw ResolutionExceeded(
          "residual_study: dt exceeds 0.25/k_max^2; the exp(-k^2 t) "
          "transients of k_max = " + std::to_string(spec.k_max) +
          " would be under-resolved");
    }
    const TimeGrid tg(model.horizon, n_steps);

    SpaceTimeField u = solve_semilinear(model, m, tg);
    SpaceTimeField V = potential_along_state(model, m, u);
    std::vector<Field> src;
    src.reserve(static_cast<size_t>(tg.n_nodes()));
    for (int j = 0; j < tg.n_nodes(); ++j) {
      Field mult = u.snapshot(j);
      for (int i = 0; i < grid.n(); ++i) {
        mult[i] = model.interaction_multiplier(mult[i]);
      }
      src.push_back(dealiased_product(spec.h, mult));
    }
    SpaceTimeField u_dot =
        solve_linear(V, SpaceTimeField(tg, std::move(src)), Field(grid, 0.0),
                     TimeDirection::Forward);

    CorrectorExpansion corr = corrector_fields(u, spec);

    SpaceTimeField residual = u_dot;
    for (int j = 0; j < tg.n_nodes(); ++j) {
      residual.snapshot(j) -= corr.z.snapshot(j);
    }

    ResidualStudyEntry entry;
    entry.k_min = spec.k_min;
    entry.k_max = spec.k_max;
    entry.residual_energy =
        time_trapezoid(residual, [](int, const Field& rj) {
          return l2_norm_sq(rj) + h1_seminorm_sq(rj);
        }) +
        l2_norm_sq(residual.terminal());
    entry.sum_k2 = window_sum(spec, 2);
    entry.sum_k4 = window_sum(spec, 4);
    double best = std::numeric_limits<double>::infinity();
    for (int e = -10; e <= 10; ++e) {
      const double upsilon = std::ldexp(1.0, e);
      best = std::min(best, entry.sum_k4 / upsilon + upsilon * entry.sum_k2);
    }
    entry.envelope = best;
    const double t_cut = model.horizon - eps_margin;
    entry.lk_sq = time_trapezoid_until(
        corr.l, t_cut, [](int, const Field& f) { return l2_norm_sq(f); });
    entry.ij_sq = interior_energy(corr.i, corr.j, t_cut);
    report.entries.push_back(entry);
  }

  // Log-log slope of residual energy against the window start.
  if (report.entries.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(report.entries.size());
    for (const ResidualStudyEntry& e : report.entries) {
      const double x = std::log(double(e.k_min));
      const double y = std::log(std::max(e.residual_energy, 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return report;
}

LeadingTermReport leading_term_check(const CorrectorExpansion& expansion,
                                     const SpaceTimeField& u,
                                     const PerturbationSpectrum& spec,
                                     double eps_margin) {
  const double T = u.time_grid().horizon();
  const double tau = T - eps_margin;

  LeadingTermReport rep;
  rep.lk_sq = time_trapezoid_until(
      expansion.l, tau, [](int, const Field& f) { return l2_norm_sq(f); });
  rep.ij_sq = interior_energy(expansion.i, expansion.j, tau);
  rep.z_sq = time_trapezoid(
      expansion.z, [](int, const Field& f) { return l2_norm_sq(f); });

  // Closed-form surrogate: (min u)^2 pi sum_k (a^2+b^2)/k^2 *
  // int_0^tau (1 - e^{-k^2 t})^2 dt, the time integral evaluated exactly.
  const double d_low = u.min_value();
  double surrogate = 0.0;
  for (int k = spec.k_min; k <= spec.k_max; ++k) {
    const double ak = spec.a[static_cast<size_t>(k)];
    const double bk = spec.b[static_cast<size_t>(k)];
    if (ak == 0.0 && bk == 0.0) continue;
    const double k2 = double(k) * double(k);
    const double time_int = tau + 2.0 * std::expm1(-k2 * tau) / k2 -
                            std::expm1(-2.0 * k2 * tau) / (2.0 * k2);
    surrogate += (ak * ak + bk * bk) / k2 * time_int;
  }
  rep.surrogate = d_low * d_low * (kTwoPi / 2.0) * surrogate;
  rep.sum_k4 = window_sum(spec, 4);
  rep.c_hat = rep.sum_k4 > 0.0 ? rep.z_sq / rep.sum_k4 : 0.0;
  rep.lower_bound_holds = rep.lk_sq >= rep.surrogate - 1e-6;
  return rep;
}

}  // namespace bilctrl
