#pragma once

#include "turbdisp/types.hpp"

namespace turbdisp {

/// Isotropic spectral kernel e0 (I - k^ k^T) |k|^(1 - 2 exponent) on a band,
/// with temporal decay exp(-rate_a |k|^(2 rate_beta) tau), against the measure
/// |k|^(1-d) dk / (2 pi)^d. band.k_max may be +inf and band.k_min may be 0.
struct SpectralKernel {
  double exponent = 4.0 / 3.0;
  double e0 = 1.0;
  double rate_a = 1.0;
  double rate_beta = 1.0 / 3.0;
  int dim = 3;
  Band band{};
};

/// Longitudinal and transverse parts of an isotropic tensor
/// T(r) = L r^ r^T + T (I - r^ r^T).
struct IsotropicPair {
  double longitudinal = 0.0;
  double transverse = 0.0;
};

/// Components of the structure function
///   int 2 [1 - cos(k.r)] exp(-a |k|^(2 beta) tau) E(k) |k|^(1-d) dk / (2pi)^d
/// at separation |r|: angular integrals in closed form (Bessel functions),
/// adaptive quadrature over log|k|, analytic tails at infinite band edges.
IsotropicPair structure_components(const SpectralKernel& kernel, double r,
                                   double tau, double rel_tol = 1e-6);

/// Assembles the tensor for separation vector r from its isotropic parts.
Mat assemble_isotropic(const Vec& r, const IsotropicPair& parts);

}  // namespace turbdisp
