#pragma once

#include <cstdint>
#include <vector>

#include "bilctrl/model.hpp"
#include "bilctrl/solver.hpp"

namespace bilctrl {

/// Admissible high-mode perturbation: Fourier window [k_min, k_max] with
/// sum (a_k^2 + b_k^2) = 1 over the window, all modes below k_min
/// annihilated, and (for the constrained construction) support exactly
/// inside the mask.
struct PerturbationSpectrum {
  TorusGrid grid;
  int k_min = 1;                      // the paper's cutoff K
  int k_max = 1;                      // retained window end, < n/3
  std::vector<double> a, b;           // indexed by k, zero outside the window
  std::vector<uint8_t> support_mask;  // 1 inside omega
  Field h;                            // physical perturbation

  double window_mass() const;  // sum over the window of a^2 + b^2

  /// Pure cosine mode: h = cos(kx), full support.
  static PerturbationSpectrum single_mode(const TorusGrid& grid, int k);
  /// Explicit window coefficients (normalized unless told otherwise),
  /// full support.
  static PerturbationSpectrum from_coefficients(const TorusGrid& grid,
                                                int k_min,
                                                std::vector<double> a,
                                                std::vector<double> b,
                                                bool normalize = true);
};

/// Constructive version of the paper's nonconstructive existence argument:
/// draw a seeded random field on the support set, remove its least-squares
/// projection onto span{cos(kx)|_omega, sin(kx)|_omega : k < K}, extend by
/// zero and renormalize the retained window. Throws DegenerateSupport when
/// the mask has fewer than 4K points or the restricted basis is
/// rank-deficient.
PerturbationSpectrum build_high_mode_perturbation(
    const TorusGrid& grid, const std::vector<uint8_t>& omega_mask, int K,
    uint64_t seed);

/// phi(s) = 1 - s e^{-s} - e^{-s}, the second-corrector time profile.
double corrector_profile(double s);

/// The closed-form two-scale approximation Z_K of the linearized state under
/// the perturbation, assembled snapshot by snapshot from the state u:
///   Z = sum_k a_k [ u cos(kx) (1-e^{-k^2 t})/k^2
///                   - 2 u_x sin(kx) phi(k^2 t)/k^3 ]
///       + b_k [ u sin(kx) (1-e^{-k^2 t})/k^2
///               + 2 u_x cos(kx) phi(k^2 t)/k^3 ],
/// together with the derivative-expansion components
///   L = u sum_k (-a_k sin + b_k cos)/k (1-e^{-k^2 t}),
///   I = u_x sum_k (a_k cos + b_k sin)/k^2 (-1 + e^{-k^2 t} + 2k^2 t e^{-k^2 t}),
///   W = sum_k (a_k sin - b_k cos)/k^3 phi(k^2 t),  J = -2 u_xx W,
/// so that dZ/dx = L + I + J pointwise.
struct CorrectorExpansion {
  SpaceTimeField z, l, i, j, w;
};

CorrectorExpansion corrector_fields(const SpaceTimeField& u,
                                    const PerturbationSpectrum& spec);

/// One row of the K-scaling study.
struct ResidualStudyEntry {
  int k_min = 0;
  int k_max = 0;
  double residual_energy = 0.0;  // int |R|_{W^{1,2}}^2 dt + |R(T)|_{L2}^2
  double envelope = 0.0;         // min_Upsilon (1/U) S4 + U S2
  double sum_k2 = 0.0;           // sum (a^2+b^2)/k^2
  double sum_k4 = 0.0;           // sum (a^2+b^2)/k^4
  double lk_sq = 0.0;            // iint_{(0,T-eps)} L^2
  double ij_sq = 0.0;            // iint_{(0,T-eps)} (I+J)^2
};

struct ScalingReport {
  std::vector<ResidualStudyEntry> entries;
  double slope = 0.0;  // log-log fit of residual_energy vs k_min
};

/// For each perturbation: solve the linearized state under the model's
/// potential, assemble Z_K, and measure the remainder R_K = udot - Z_K.
/// Each solve uses dt <= min(1e-3 T, 0.25/k_max^2); a caller-supplied
/// n_steps below that guard throws ResolutionExceeded.
ScalingReport residual_study(const ModelSpec& model, const Field& m,
                             const std::vector<PerturbationSpectrum>& specs,
                             double eps_margin, int n_steps_override = 0);

/// Leading-term diagnostics at one K: the measured iint L^2 against the
/// closed-form lower surrogate (min u)^2 pi sum (a^2+b^2)/k^2 int
/// (1-e^{-k^2 t})^2 dt, the next-order mass iint (I+J)^2, and the
/// lower-order bound constant iint Z^2 / sum (a^2+b^2)/k^4.
struct LeadingTermReport {
  double lk_sq = 0.0;
  double surrogate = 0.0;
  double ij_sq = 0.0;
  double z_sq = 0.0;
  double sum_k4 = 0.0;
  double c_hat = 0.0;           // z_sq / sum_k4
  bool lower_bound_holds = false;  // lk_sq >= surrogate - 1e-6
};

LeadingTermReport leading_term_check(const CorrectorExpansion& expansion,
                                     const SpaceTimeField& u,
                                     const PerturbationSpectrum& spec,
                                     double eps_margin);

}  // namespace bilctrl
