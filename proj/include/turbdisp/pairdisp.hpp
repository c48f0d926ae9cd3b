#pragma once

#include "turbdisp/ensemble.hpp"
#include "turbdisp/params.hpp"
#include "turbdisp/statkit.hpp"
#include "turbdisp/synthfield.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace turbdisp {

/// Rescaled family dx = eps^(2q+alpha-2) V(eps^(2(q-beta)) t, x) dt + sqrt(kappa~) dw
/// on the band (1/L, K).
struct RescaleSpec {
  double epsilon = 1.0;
  double q = 0.0;
  double kappa_tilde = 0.0;
  Band band{};

  /// q = 2 - alpha - beta, for which the drift and time-speed exponents
  /// satisfy 2q + alpha - 2 = q - beta.
  static RescaleSpec white_noise(const SpectrumParams& p, double epsilon, double kappa_tilde,
                                 Band band);
  /// q = 1 - alpha / 2 (boundary and frozen classes).
  static RescaleSpec frozen(const SpectrumParams& p, double epsilon, double kappa_tilde, Band band);

  double drift_prefactor(const SpectrumParams& p) const;  // eps^(2q + alpha - 2)
  double time_speed(const SpectrumParams& p) const;       // eps^(2(q - beta))
  double molecular_kappa() const;                         // eps^(2 - 2q) kappa~
  /// eps^(beta - q): ratio of the field correlation time to the eddy time at
  /// unit rescaled scale; vanishes as eps -> 0 in the white-noise classes.
  double small_parameter(const SpectrumParams& p) const;
};

struct PairSimOptions {
  std::vector<double> sample_times;     // must start at 0
  double dt = 1e-3;
  int n_modes = 256;
  std::optional<ModeLayout> layout;
  double c_dt = 0.1;                    // dt <= c_dt / (time speed * a K^(2 beta))
  bool random_direction = false;        // rotate x0 uniformly per pair
  bool record_drift = false;
  bool quenched = false;                // one shared field realization
  unsigned threads = 1;
};

/// Largest admissible step for a band and time speed.
double stable_dt(const SpectrumParams& p, Band band, double time_speed, double c_dt);

/// dx = U(t, x) dt + sqrt(kappa) dw, one field realization per pair.
PairEnsemble simulate_pairs(const SpectrumParams& p, const Vec& x0, double kappa,
                            std::size_t n_pairs, std::uint64_t seed, const PairSimOptions& opts);

/// The rescaled dynamics of a RescaleSpec.
PairEnsemble simulate_rescaled(const SpectrumParams& p, const RescaleSpec& rs, const Vec& x0,
                               std::size_t n_pairs, std::uint64_t seed, const PairSimOptions& opts);

/// Mean of |x(t)|^2 per sample time with its standard error (for a sample
/// mean the delete-one jackknife error equals sd / sqrt(n)).
using MsdSeries = Series;
MsdSeries msd(const PairEnsemble& ens);

struct DiffusivityBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double r_center = 0.0;  // geometric
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  bool missing = true;
};

struct DiffusivityOptions {
  int max_lag = 3;                 // sample-grid lags used in the regression
  std::size_t min_samples = 200;
  std::size_t jackknife_groups = 20;
  int refinements = 3;             // passes that re-cap the lag per bin
  double lag_fraction = 0.1;       // lag cap as a fraction of r_lo^2 / (2 D)
};

/// Per separation bin, half the slope of E[(x^.(x(t+h) - x(t)))^2] against the
/// lag h (regression through the origin over lags 1..max_lag of the sample
/// grid), conditioned on |x(t)| in the bin. After the first pass each bin only
/// keeps lags below lag_fraction times its diffusion time r_lo^2 / (2 D) from
/// the previous pass. Errors by grouped jackknife over pairs. Bins with fewer
/// than min_samples contributing starting points are missing.
std::vector<DiffusivityBin> relative_diffusivity(const PairEnsemble& ens,
                                                 const std::vector<double>& bin_edges,
                                                 const DiffusivityOptions& opts = {});

/// Bins with estimates as a Series in r (for power-law fits).
Series diffusivity_series(const std::vector<DiffusivityBin>& bins);

/// sum_p u_p(t_ref).u_p(t_j) / sum_p |u_p(t_ref)|^2 for j >= ref, against
/// lag t_j - t_ref. Needs recorded drift.
Series drift_autocorrelation(const PairEnsemble& ens, std::size_t ref_index);

}  // namespace turbdisp
