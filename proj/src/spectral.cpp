#include "turbdisp/spectral.hpp"

#include "turbdisp/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace turbdisp {

namespace {

constexpr double kPi = std::numbers::pi;

// Beyond k r = kOscCut the cosine part is dropped and the constant part of
// 2[1 - cos] is integrated on its own; below k r = kSeriesCut the leading
// small-argument term is integrated analytically.
constexpr double kOscCut = 1e3;
constexpr double kSeriesCut = 1e-4;

// Angular weights: for each component X the solid-angle integral of w_X and of
// c^2 w_X, where c = k^.r^.
struct AngularMoments {
  double total_l, total_t;  // int w_X dOmega
  double m2_l, m2_t;        // int c^2 w_X dOmega
};

AngularMoments angular_moments(int dim) {
  if (dim == 2) return {kPi, kPi, kPi / 4.0, 3.0 * kPi / 4.0};
  return {8.0 * kPi / 3.0, 8.0 * kPi / 3.0, 8.0 * kPi / 15.0, 16.0 * kPi / 15.0};
}

// int_{k1}^{k2} k^p dk
double power_integral(double p, double k1, double k2) {
  if (std::abs(p + 1.0) < 1e-14) return std::log(k2 / k1);
  if (std::isinf(k2)) return -std::pow(k1, p + 1.0) / (p + 1.0);
  if (k1 == 0.0) return std::pow(k2, p + 1.0) / (p + 1.0);
  return (std::pow(k2, p + 1.0) - std::pow(k1, p + 1.0)) / (p + 1.0);
}

// int_{-1}^{1} c^(2m) [1 - cos(rho c)] dc by its power series.
double cos_moment_series(int m, double rho) {
  const double r2 = rho * rho;
  double term = 1.0;  // (-1)^(n+1) rho^(2n) / (2n)!
  double sum = 0.0;
  for (int n = 1; n < 40; ++n) {
    term *= (n == 1 ? 1.0 : -1.0) * r2 / ((2.0 * n - 1.0) * (2.0 * n));
    const double add = 2.0 * term / (2.0 * n + 2.0 * m + 1.0);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// 1 - J0(rho) and J2(rho) by their power series.
void bessel_series(double rho, double& one_minus_j0, double& j2) {
  const double x2 = 0.25 * rho * rho;
  double t0 = 1.0, s0 = 0.0;
  double t2 = x2 / 2.0, s2 = t2;
  for (int n = 1; n < 40; ++n) {
    t0 *= -x2 / (static_cast<double>(n) * n);
    s0 -= t0;
    t2 *= -x2 / (static_cast<double>(n) * (n + 2));
    s2 += t2;
    if (std::abs(t0) < 1e-17 * std::abs(s0) && std::abs(t2) < 1e-17 * std::abs(s2)) break;
  }
  one_minus_j0 = s0;
  j2 = s2;
}

// Angular integrals of 2[1 - cos(rho c)] w_X(c) over the unit sphere.
IsotropicPair angular(int dim, double rho) {
  IsotropicPair out;
  if (rho == 0.0) return out;
  constexpr double kSeriesBelow = 1.0;
  if (dim == 2) {
    double omj0 = 0.0, j2 = 0.0;
    if (rho < kSeriesBelow) {
      bessel_series(rho, omj0, j2);
    } else {
      const double j0 = boost::math::cyl_bessel_j(0, rho);
      omj0 = 1.0 - j0;
      j2 = 2.0 * boost::math::cyl_bessel_j(1, rho) / rho - j0;
    }
    out.longitudinal = 2.0 * kPi * (omj0 - j2);
    out.transverse = 2.0 * kPi * (omj0 + j2);
  } else {
    double a = 0.0, b = 0.0;
    if (rho < kSeriesBelow) {
      a = cos_moment_series(0, rho);
      b = cos_moment_series(1, rho);
    } else {
      const double s = std::sin(rho), c = std::cos(rho);
      a = 2.0 - 2.0 * s / rho;
      b = 2.0 / 3.0 - 2.0 * ((rho * rho - 2.0) * s + 2.0 * rho * c) / (rho * rho * rho);
    }
    out.longitudinal = 4.0 * kPi * (a - b);
    out.transverse = 2.0 * kPi * (a + b);
  }
  return out;
}

}  // namespace

IsotropicPair structure_components(const SpectralKernel& kn, double r,
                                   double tau, double rel_tol) {
  if (kn.dim != 2 && kn.dim != 3) throw ParameterError("structure: dim must be 2 or 3");
  if (!(kn.band.k_min >= 0.0) || !(kn.band.k_max > kn.band.k_min))
    throw ParameterError("structure: empty wavenumber band");
  if (!(tau >= 0.0)) throw ParameterError("structure: tau must be non-negative");
  IsotropicPair out;
  if (r == 0.0 || kn.e0 == 0.0) return out;
  r = std::abs(r);

  const double two_alpha = 2.0 * kn.exponent;
  if (std::isinf(kn.band.k_max) && tau == 0.0 && !(kn.exponent > 1.0))
    throw ParameterError("structure: unbounded band diverges for exponent <= 1");
  if (kn.band.k_min == 0.0 && !(kn.exponent < 2.0))
    throw ParameterError("structure: band reaching k = 0 diverges for exponent >= 2");

  const double pref = kn.e0 / std::pow(2.0 * kPi, kn.dim);
  const AngularMoments mom = angular_moments(kn.dim);
  const double decay_scale = kn.rate_a * tau;
  auto decay = [&](double k) {
    return decay_scale == 0.0 ? 1.0 : std::exp(-decay_scale * std::pow(k, 2.0 * kn.rate_beta));
  };

  double k_lo = kn.band.k_min;
  double k_hi = kn.band.k_max;

  // Small-k analytic piece: 2[1 - cos x] ~ x^2 with x = k r c, decay to first order.
  const double k_series = kSeriesCut / r;
  if (k_lo < k_series && k_hi > k_series) {
    const double p = 3.0 - two_alpha;
    double radial = power_integral(p, k_lo, k_series);
    if (decay_scale > 0.0)
      radial -= decay_scale * power_integral(p + 2.0 * kn.rate_beta, k_lo, k_series);
    out.longitudinal += r * r * mom.m2_l * radial;
    out.transverse += r * r * mom.m2_t * radial;
    k_lo = k_series;
  }

  // Exponential decay makes everything above k_exp negligible.
  if (decay_scale > 0.0) {
    const double k_exp = std::pow(60.0 / decay_scale, 1.0 / (2.0 * kn.rate_beta));
    k_hi = std::min(k_hi, k_exp);
  }

  // Large-k piece: the oscillating part averages out, keep 2 * w_X.
  const double k_osc = kOscCut / r;
  if (k_hi > k_osc) {
    const double k_from = std::max(k_lo, k_osc);
    double radial = 0.0;
    if (decay_scale == 0.0) {
      radial = power_integral(1.0 - two_alpha, k_from, k_hi);
    } else {
      auto f = [&](double u) {
        const double k = std::exp(u);
        return std::pow(k, 2.0 - two_alpha) * decay(k);
      };
      radial = integrate(f, std::log(k_from), std::log(k_hi), rel_tol * 0.1).value;
    }
    out.longitudinal += 2.0 * mom.total_l * radial;
    out.transverse += 2.0 * mom.total_t * radial;
    k_hi = k_from;
  }

  if (k_hi > k_lo) {
    auto fl = [&](double u) {
      const double k = std::exp(u);
      return std::pow(k, 2.0 - two_alpha) * decay(k) * angular(kn.dim, k * r).longitudinal;
    };
    auto ft = [&](double u) {
      const double k = std::exp(u);
      return std::pow(k, 2.0 - two_alpha) * decay(k) * angular(kn.dim, k * r).transverse;
    };
    // Split into decades so the adaptive rule sees every oscillation scale.
    const double u0 = std::log(k_lo);
    const double u1 = std::log(k_hi);
    const int pieces = std::max(1, static_cast<int>(std::ceil((u1 - u0) / std::log(10.0))));
    const double h = (u1 - u0) / pieces;
    for (int i = 0; i < pieces; ++i) {
      const double a = u0 + i * h;
      const double b = (i + 1 == pieces) ? u1 : a + h;
      out.longitudinal += integrate(fl, a, b, rel_tol * 0.1).value;
      out.transverse += integrate(ft, a, b, rel_tol * 0.1).value;
    }
  }

  out.longitudinal *= pref;
  out.transverse *= pref;
  return out;
}

Mat assemble_isotropic(const Vec& r, const IsotropicPair& parts) {
  const auto d = r.size();
  Mat out = Mat::Identity(d, d) * parts.transverse;
  const double n = r.norm();
  if (n == 0.0) return Mat::Zero(d, d);
  const Vec rh = r / n;
  out += (parts.longitudinal - parts.transverse) * (rh * rh.transpose());
  return out;
}

}  // namespace turbdisp
