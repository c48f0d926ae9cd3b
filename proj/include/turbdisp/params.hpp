#pragma once

#include "turbdisp/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace turbdisp {

/// Constants of the power-law velocity model.
///
/// The spectral tensor is e0 (I - k k^T / |k|^2) |k|^(1 - 2 alpha) on the band
/// (1/ell0, 1/ell1) and each wavenumber decorrelates at rate a |k|^(2 beta).
/// The spectral measure throughout the library is |k|^(1-d) dk / (2 pi)^d, the
/// convention under which c_alpha normalizes the longitudinal structure
/// function: S_LL(r) = e0 r^(2 alpha - 2) / c_alpha for an unbounded band.
struct SpectrumParams {
  double alpha = 4.0 / 3.0;
  double beta = 1.0 / 3.0;
  double e0 = 1.0;
  double a = 1.0;
  double ell0 = 1.0;
  double ell1 = 1e-3;
  int dim = 3;

  Band band() const noexcept { return {1.0 / ell0, 1.0 / ell1}; }
};

/// Builds params from the rms longitudinal increment u0 over ell0 and the
/// dimensionless rate constant c0: e0 = C_alpha u0^2 ell0^(2-2alpha),
/// a = c0 ell0^(2beta-1) u0.
SpectrumParams make_params(double alpha, double beta, double u0, double c0,
                           double ell0, double ell1, int dim);

/// Direct construction from (e0, a). e0 = 0 is accepted as the null-field
/// control used by Brownian sanity runs.
SpectrumParams make_params_direct(double alpha, double beta, double e0, double a,
                                  double ell0, double ell1, int dim);

/// Throws ParameterError naming the first violated bound.
void validate(const SpectrumParams& p);

/// Gamma function by the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
double lanczos_gamma(double x);

/// (4 pi)^(d/2) 2^(2 alpha - 3) (2 alpha - 2) Gamma(alpha + d/2)
///   / ((d - 1) Gamma(2 - alpha)),  alpha in (1, 2).
double c_alpha(double alpha, int dim);

struct ScalingExponents {
  double q = 0.0;               // time-rescaling exponent
  std::optional<double> p;      // MSD exponent 1/q, when q > 0
  double eta = 0.0;             // Hurst exponent of the limit field, 1 - q
  std::optional<double> nu;     // viscous cutoff rate, alpha+beta < 2 < alpha+2beta
  std::optional<double> gamma_kappa0_zero;
  std::optional<double> gamma_kappa0_positive;
};

ScalingExponents exponents(const SpectrumParams& p);

enum class Regime {
  WhiteNoiseI,    // alpha + 2 beta > 4
  WhiteNoiseII,   // = 4
  WhiteNoiseIII,  // (3, 4)
  WhiteNoiseIV,   // = 3
  WhiteNoiseV,    // (2, 3)
  Boundary,       // = 2
  Frozen,         // < 2
};

std::string to_string(Regime r);

/// A rate expression eps^e K^k L^l kappa~^m (log K)^g that must vanish along a
/// limit; on a finite sweep it is evaluated at each epsilon.
struct RateMonomial {
  std::string source;  // e.g. "diffusive closure (v)"
  double eps_power = 0.0;
  double k_power = 0.0;
  double l_power = 0.0;
  double kappa_power = 0.0;
  double log_k_power = 0.0;

  double evaluate(double eps, double k_cut, double l_outer,
                  double kappa_tilde) const;
  std::string expression() const;
};

struct RegimeReport {
  Regime regime = Regime::WhiteNoiseV;
  std::vector<RateMonomial> constraints;
  bool kolmogorov = false;
  // L -> infinity is only admissible when alpha + beta < 2.
  bool l_limit_admissible = false;
};

struct LimitOptions {
  bool l_to_infinity = false;     // the outer scale L grows with 1/eps
  bool kappa_tilde_zero = false;  // pure transport, kappa~ = 0
};

/// Assigns exactly one regime to (alpha, beta) and lists the cutoff-coupling
/// rates the epsilon schedules must drive to zero.
RegimeReport classify_regime(const SpectrumParams& p, bool kappa0_positive,
                             LimitOptions opts = {});

/// ell0 / ell1 ~ Re^(1 / (4 - 2 alpha)).
double reynolds_ratio(double alpha, double re);

/// Spectral tensor at wavevector k for the params band.
Mat energy_spectrum(const SpectrumParams& p, const Vec& k);
/// Same with an explicit band, for rescaled fields.
Mat energy_spectrum(const SpectrumParams& p, const Vec& k, Band band);

// Tolerance for deciding alpha + 2 beta lies on a regime boundary.
inline constexpr double kRegimeTolerance = 1e-12;

}  // namespace turbdisp
