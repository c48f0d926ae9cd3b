#pragma once

#include "turbdisp/ensemble.hpp"
#include "turbdisp/params.hpp"
#include "turbdisp/spectral.hpp"
#include "turbdisp/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace turbdisp {

/// White-noise limit of the colored model. The limiting Brownian field has
/// spectral exponent alpha + beta (Hurst exponent eta = alpha + beta - 1) and
/// increment covariance Gamma(x, y); the pair separation is the Ito diffusion
/// with matrix D(x) = kappa0 I + (2 / a) Gamma(x, x).
///
/// With no band the field is the scale-free L = infinity limit, which needs
/// alpha + beta < 2; with a band (1/L, K) (K may be infinite) the isotropic
/// parts of Gamma(x, x) are tabulated on first use on a log grid in |x|, interpolated
/// by cubics in log-log and extended as power laws beyond the table
/// (relative accuracy about 1e-5 below r = L, 1e-3 where the parts oscillate
/// about their plateau).
class KraichnanOracle {
 public:
  KraichnanOracle(const SpectrumParams& p, double kappa0, std::optional<Band> band = std::nullopt);

  double exponent() const noexcept { return kernel_.exponent; }
  double eta() const noexcept { return kernel_.exponent - 1.0; }
  double kappa0() const noexcept { return kappa0_; }
  int dim() const noexcept { return kernel_.dim; }
  bool unbounded() const noexcept { return !band_.has_value(); }
  const SpectralKernel& kernel() const noexcept { return kernel_; }

  /// Gamma(x, y) by adaptive quadrature (relative tolerance 1e-6).
  Mat gamma1(const Vec& x, const Vec& y) const;

  /// Closed form of Gamma(x, x) for the unbounded band.
  Mat gamma1_closed(const Vec& x) const;

  /// Generator coefficients Gamma(x, x) from the fast evaluator (closed form
  /// or table).
  Mat b_bar(const Vec& x) const;

  /// Gamma(x, y) from the fast evaluator via the structure-function identity.
  Mat gamma1_fast(const Vec& x, const Vec& y) const;

  /// kappa0 I + (2 / a) Gamma(x, x).
  Mat diffusion(const Vec& x) const;

  /// kappa0 / 2 + x^.Gamma(x, x) x^ / a.
  double longitudinal_diffusivity(const Vec& x) const;

  /// Longitudinal and transverse parts of Gamma(x, x) at |x| = r.
  IsotropicPair parts(double r) const;

 private:
  SpectralKernel kernel_;
  double kappa0_ = 0.0;
  double rate_a_ = 1.0;
  std::optional<Band> band_;
  double closed_coef_ = 0.0;  // e0 / C_{alpha+beta}

  // log S_L, log S_T against log r; shared between copies.
  struct Table {
    std::once_flag built;
    double log_r0 = 0.0, log_step = 0.0;
    std::vector<double> log_l, log_t;
  };
  std::shared_ptr<Table> table_;
  const Table& table() const;
};

/// Closed form C^{-1} e0 |x|^{2 eta} [(1 + 2eta/(d-1)) I - (2eta/(d-1)) x^ x^T]
/// with exponent alpha + beta.
Mat gamma1_closed(const SpectrumParams& p, const Vec& x);

struct LimitSimOptions {
  std::vector<double> sample_times;  // must start at 0
  double dt_max = 0.0;               // 0: sample_times.back() / 1000
  double step_factor = 0.01;         // dt = c |x|^2 / lambda_max(D(x))
  double absorb_factor = 1e-6;       // absorb below this fraction of |x0|
  unsigned threads = 1;
};

/// Euler-Maruyama ensemble of the limit pair diffusion with adaptive steps
/// (each trajectory driven by its own stream (seed, Limit, pair)).
PairEnsemble simulate_limit_pairs(const KraichnanOracle& oracle, const Vec& x0,
                                  std::size_t n_pairs, std::uint64_t seed,
                                  const LimitSimOptions& opts);

/// Diffusion matrix of the two-point motion (x1, x2): blocks
/// kappa0 delta_ij I + (2 / a) Gamma(x_i, x_j).
Eigen::MatrixXd two_point_diffusion(const KraichnanOracle& oracle, const Vec& x1, const Vec& x2);

struct TwoPointEstimate {
  std::vector<double> value;
  std::vector<double> stderr_;
};

using TwoPointFunction = std::function<double(const Vec&, const Vec&)>;

/// Feynman-Kac estimate of F2(t, x1, x2) = E phi(X1(t), X2(t)) for each pair of
/// starting points under the two-point limit diffusion. Points closer than
/// 1e-6 of the initial scale coalesce and move together from then on.
TwoPointEstimate two_point_moment(const KraichnanOracle& oracle, const TwoPointFunction& phi,
                                  const std::vector<std::pair<Vec, Vec>>& points, double t,
                                  std::size_t n_paths, std::uint64_t seed,
                                  double step_factor = 0.01, unsigned threads = 1);

/// Symmetric square root of a PSD matrix with a jitter floor of
/// 1e-14 tr(m) on the eigenvalues. Throws FactorizationError when an
/// eigenvalue is below -1e-12 tr(m).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

}  // namespace turbdisp
