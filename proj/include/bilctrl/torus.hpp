#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "bilctrl/errors.hpp"

namespace bilctrl {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Uniform collocation grid on the torus [0, 2*pi).
class TorusGrid {
 public:
  explicit TorusGrid(int n_points);

  int n() const { return n_; }
  double spacing() const { return kTwoPi / n_; }
  double node(int j) const { return spacing() * j; }

  /// Largest alias-safe mode for quadratic products (strict 2/3 rule).
  int dealias_cutoff() const { return (n_ - 1) / 3; }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.n_ == b.n_;
  }

 private:
  int n_;
};

/// Real-valued function sampled at the grid nodes. Immutable by convention:
/// operations return new Fields.
class Field {
 public:
  explicit Field(TorusGrid grid, double fill = 0.0)
      : grid_(grid), v_(static_cast<size_t>(grid.n()), fill) {}
  Field(TorusGrid grid, std::vector<double> values);

  static Field sample(TorusGrid grid, const std::function<double(double)>& f);

  const TorusGrid& grid() const { return grid_; }
  int size() const { return grid_.n(); }
  double operator[](int j) const { return v_[static_cast<size_t>(j)]; }
  double& operator[](int j) { return v_[static_cast<size_t>(j)]; }
  const std::vector<double>& values() const { return v_; }

  bool all_finite() const;
  double min_value() const;
  double max_value() const;
  double sup_norm() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field f) { return f *= s; }

 private:
  TorusGrid grid_;
  std::vector<double> v_;
};

/// Raw pointwise product (no dealiasing; caller owns aliasing concerns).
Field pointwise_product(const Field& f, const Field& g);
/// Pointwise quotient; denominator must be bounded away from zero.
Field pointwise_quotient(const Field& f, const Field& g);
Field apply(const Field& f, const std::function<double(double)>& fn);

/// Fourier coefficients of a real Field, stored half-complex:
/// c_k = (1/n) sum_j f_j exp(-i k x_j) for k = 0 .. n/2. Conjugate symmetry
/// c_{-k} = conj(c_k) is implicit. Cosine/sine amplitudes: f(x) = a_0 +
/// sum_{k>=1} a_k cos(kx) + b_k sin(kx).
class SpectrumField {
 public:
  SpectrumField(TorusGrid grid, std::vector<std::complex<double>> coeffs);

  const TorusGrid& grid() const { return grid_; }
  int n_modes() const { return static_cast<int>(c_.size()); }  // n/2 + 1

  std::complex<double> coeff(int k) const { return c_[static_cast<size_t>(k)]; }
  std::complex<double>& coeff(int k) { return c_[static_cast<size_t>(k)]; }

  /// Cosine amplitude of mode k (k in [0, n/2]; Nyquist handled as a single
  /// real bin).
  double a(int k) const;
  /// Sine amplitude of mode k (zero for k = 0 and Nyquist).
  double b(int k) const;

  /// Zero all modes with |k| > cutoff.
  void truncate_above(int cutoff);

 private:
  TorusGrid grid_;
  std::vector<std::complex<double>> c_;
};

SpectrumField forward_transform(const Field& f);
Field inverse_transform(const SpectrumField& s);

/// Spectral derivative of order 1 or 2 (Nyquist mode zeroed for order 1).
Field spatial_derivative(const Field& f, int order);

/// Alias-free product: both factors truncated at the 2/3-rule cutoff, the
/// pointwise product formed on the grid, and the result truncated again so
/// aliased images (which land strictly above the cutoff) are discarded.
Field dealiased_product(const Field& f, const Field& g);

/// Rectangle-rule integral over the torus (spectrally accurate).
double integral(const Field& f);
/// int f^2 dx.
double l2_norm_sq(const Field& f);
/// int |df/dx|^2 dx, computed as pi * sum k^2 (a_k^2 + b_k^2) below Nyquist.
double h1_seminorm_sq(const Field& f);

}  // namespace bilctrl
