#include "bilctrl/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace bilctrl {

namespace {

// One cached plan pair per grid size. FFTW planning is not thread-safe and
// plan execution reuses the workspace buffers, so all access goes through
// the registry mutex. FFTW_ESTIMATE keeps planning deterministic.
struct PlanPair {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit PlanPair(int n) {
    real = fftw_alloc_real(static_cast<size_t>(n));
    cplx = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    r2c = fftw_plan_dft_r2c_1d(n, real, cplx, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_1d(n, cplx, real, FFTW_ESTIMATE);
  }
  ~PlanPair() {
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(cplx);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

PlanPair& plans_for(int n) {
  static std::unordered_map<int, std::unique_ptr<PlanPair>> registry;
  auto it = registry.find(n);
  if (it == registry.end()) {
    it = registry.emplace(n, std::make_unique<PlanPair>(n)).first;
  }
  return *it->second;
}

}  // namespace

TorusGrid::TorusGrid(int n_points) : n_(n_points) {
  if (n_points < 8 || n_points % 2 != 0) {
    throw Error("TorusGrid: n_points must be even and >= 8, got " +
                std::to_string(n_points));
  }
}

Field::Field(TorusGrid grid, std::vector<double> values)
    : grid_(grid), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != grid_.n()) {
    throw Error("Field: value count does not match grid size");
  }
}

Field Field::sample(TorusGrid grid, const std::function<double(double)>& f) {
  Field out(grid);
  for (int j = 0; j < grid.n(); ++j) out[j] = f(grid.node(j));
  return out;
}

bool Field::all_finite() const {
  return std::all_of(v_.begin(), v_.end(),
                     [](double x) { return std::isfinite(x); });
}

double Field::min_value() const {
  return *std::min_element(v_.begin(), v_.end());
}

double Field::max_value() const {
  return *std::max_element(v_.begin(), v_.end());
}

double Field::sup_norm() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

Field& Field::operator+=(const Field& o) {
  for (size_t j = 0; j < v_.size(); ++j) v_[j] += o.v_[j];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  for (size_t j = 0; j < v_.size(); ++j) v_[j] -= o.v_[j];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

Field pointwise_product(const Field& f, const Field& g) {
  Field out = f;
  for (int j = 0; j < out.size(); ++j) out[j] *= g[j];
  return out;
}

Field pointwise_quotient(const Field& f, const Field& g) {
  Field out = f;
  for (int j = 0; j < out.size(); ++j) out[j] /= g[j];
  return out;
}

Field apply(const Field& f, const std::function<double(double)>& fn) {
  Field out = f;
  for (int j = 0; j < out.size(); ++j) out[j] = fn(f[j]);
  return out;
}

SpectrumField::SpectrumField(TorusGrid grid,
                             std::vector<std::complex<double>> coeffs)
    : grid_(grid), c_(std::move(coeffs)) {
  if (static_cast<int>(c_.size()) != grid_.n() / 2 + 1) {
    throw Error("SpectrumField: expected n/2 + 1 coefficients");
  }
}

double SpectrumField::a(int k) const {
  if (k == 0 || k == grid_.n() / 2) return c_[static_cast<size_t>(k)].real();
  return 2.0 * c_[static_cast<size_t>(k)].real();
}

double SpectrumField::b(int k) const {
  if (k == 0 || k == grid_.n() / 2) return 0.0;
  return -2.0 * c_[static_cast<size_t>(k)].imag();
}

void SpectrumField::truncate_above(int cutoff) {
  for (int k = cutoff + 1; k < n_modes(); ++k) c_[static_cast<size_t>(k)] = 0.0;
}

SpectrumField forward_transform(const Field& f) {
  const int n = f.grid().n();
  std::vector<std::complex<double>> out(static_cast<size_t>(n / 2 + 1));
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    PlanPair& p = plans_for(n);
    std::copy(f.values().begin(), f.values().end(), p.real);
    fftw_execute(p.r2c);
    for (int k = 0; k <= n / 2; ++k) {
      out[static_cast<size_t>(k)] =
          std::complex<double>(p.cplx[k][0], p.cplx[k][1]) / double(n);
    }
  }
  return SpectrumField(f.grid(), std::move(out));
}

Field inverse_transform(const SpectrumField& s) {
  const int n = s.grid().n();
  std::vector<double> out(static_cast<size_t>(n));
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    PlanPair& p = plans_for(n);
    for (int k = 0; k <= n / 2; ++k) {
      p.cplx[k][0] = s.coeff(k).real();
      p.cplx[k][1] = s.coeff(k).imag();
    }
    fftw_execute(p.c2r);
    std::copy(p.real, p.real + n, out.begin());
  }
  return Field(s.grid(), std::move(out));
}

Field spatial_derivative(const Field& f, int order) {
  if (order != 1 && order != 2) {
    throw Error("spatial_derivative: order must be 1 or 2");
  }
  SpectrumField s = forward_transform(f);
  const int half = f.grid().n() / 2;
  for (int k = 0; k <= half; ++k) {
    if (order == 1) {
      // ik, with the Nyquist mode zeroed (its odd derivative is ambiguous).
      std::complex<double> c = s.coeff(k);
      s.coeff(k) = (k == half) ? 0.0
                               : std::complex<double>(-k * c.imag(),
                                                      k * c.real());
    } else {
      s.coeff(k) *= -double(k) * double(k);
    }
  }
  return inverse_transform(s);
}

Field dealiased_product(const Field& f, const Field& g) {
  const int cutoff = f.grid().dealias_cutoff();
  SpectrumField sf = forward_transform(f);
  SpectrumField sg = forward_transform(g);
  sf.truncate_above(cutoff);
  sg.truncate_above(cutoff);
  Field ff = inverse_transform(sf);
  Field gg = inverse_transform(sg);
  Field prod = pointwise_product(ff, gg);
  SpectrumField sp = forward_transform(prod);
  sp.truncate_above(cutoff);
  return inverse_transform(sp);
}

double integral(const Field& f) {
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s * f.grid().spacing();
}

double l2_norm_sq(const Field& f) {
  double s = 0.0;
  for (double x : f.values()) s += x * x;
  return s * f.grid().spacing();
}

double h1_seminorm_sq(const Field& f) {
  SpectrumField s = forward_transform(f);
  const int half = f.grid().n() / 2;
  double acc = 0.0;
  for (int k = 1; k < half; ++k) {
    const double a = s.a(k);
    const double b = s.b(k);
    acc += double(k) * double(k) * (a * a + b * b);
  }
  return acc * kTwoPi / 2.0;
}

}  // namespace bilctrl
