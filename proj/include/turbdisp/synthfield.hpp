#pragma once

#include "turbdisp/params.hpp"
#include "turbdisp/rng.hpp"
#include "turbdisp/spectral.hpp"
#include "turbdisp/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace turbdisp {

/// How the band is cut into cells: n_shells log-spaced magnitude shells times
/// n_dirs directions per shell. With jitter each realization draws its
/// wavevector uniformly (in spectral measure) inside every cell, which makes
/// ensemble second moments equal to the continuum integral; without jitter
/// cells are represented by their geometric midpoint and an unrotated
/// direction set.
struct ModeLayout {
  int n_shells = 64;
  int n_dirs = 16;
  bool jitter = true;
};

/// Splits n_modes as gcd(n_modes, default directions) directions per shell
/// (16 in 2-D, 32 in 3-D).
ModeLayout default_layout(int n_modes, int dim);

/// Retained wavevectors with their stationary variances and OU rates.
struct ModeSet {
  int dim = 3;
  Band band{};
  std::vector<double> wavevectors;  // size() * dim
  std::vector<double> basis;        // size() * (dim - 1) * dim, orthonormal, transverse to k
  std::vector<double> variance;     // per transverse component, velocity^2
  std::vector<double> weights;      // variance / (e0 |k|^(1 - 2 alpha))
  std::vector<double> rates;        // a |k|^(2 beta)

  std::size_t size() const noexcept { return variance.size(); }
  Vec wavevector(std::size_t m) const;
  double magnitude(std::size_t m) const { return wavevector(m).norm(); }
};

/// Builds the cells of a layout. `rng` supplies the placement jitter.
ModeSet make_modes(const SpectrumParams& p, Band band, const ModeLayout& layout,
                   RandomStream& rng);

/// Modes at caller-chosen wavevectors with explicit weights (variance =
/// weight * e0 |k|^(1-2alpha)).
ModeSet make_modes_explicit(const SpectrumParams& p, Band band,
                            const std::vector<Vec>& wavevectors,
                            const std::vector<double>& weights);

/// Finite-mode realization of the incompressible Gaussian velocity field,
///   u(x) = sum_m Re{A_m exp(i k_m.x)},  A_m = b_m + i c_m,
/// with b_m, c_m transverse to k_m and each an exact OU process of rate
/// a|k_m|^(2 beta). Only increments U(x) - U(0) are observed.
class SpectralField {
 public:
  SpectralField(SpectrumParams params, ModeSet modes, RandomStream rng);

  const SpectrumParams& params() const noexcept { return params_; }
  const ModeSet& modes() const noexcept { return modes_; }
  double time() const noexcept { return time_; }
  int dim() const noexcept { return modes_.dim; }

  /// Exact OU update of every amplitude by dt (dt >= 0).
  void advance(double dt);

  /// U(t, x) - U(t, 0). Writes dim components into out.
  void eval_increment(std::span<const double> x, std::span<double> out) const;
  Vec eval_increment(const Vec& x) const;

  /// Full complex amplitude of mode m as (real part, imaginary part).
  Vec amplitude_real(std::size_t m) const;
  Vec amplitude_imag(std::size_t m) const;

  /// Transverse coordinates, 2 (dim - 1) per mode: (b_1.., c_1..).
  std::span<const double> raw_amplitudes() const noexcept { return amp_; }
  std::span<double> raw_amplitudes() noexcept { return amp_; }
  void set_time(double t) noexcept { time_ = t; }

  /// Counter of the OU noise stream, for snapshots.
  std::uint64_t stream_position() const noexcept { return rng_.blocks_consumed(); }
  void seek_stream(std::uint64_t block) noexcept { rng_.seek(block); }

  /// max_m |k.A_m| / (|k| |A_m|) over real and imaginary parts.
  double incompressibility_residual() const;

 private:
  void refresh_coefficients(double dt);

  SpectrumParams params_;
  ModeSet modes_;
  RandomStream rng_;
  std::vector<double> amp_;
  std::vector<double> decay_;   // exp(-r dt) for the cached dt
  std::vector<double> kick_;    // sqrt(variance (1 - exp(-2 r dt)))
  double cached_dt_ = -1.0;
  double time_ = 0.0;
  std::vector<double> noise_;
};

/// Coefficients of one exact OU step of rate r over dt: the decay factor
/// exp(-r dt) and the injected variance fraction 1 - exp(-2 r dt).
struct OuStep {
  double decay = 1.0;
  double injected = 0.0;
};
OuStep ou_step(double rate, double dt);
/// Composition of two steps (decays multiply, stationary variance is kept).
OuStep compose(const OuStep& first, const OuStep& second);

struct SynthesisOptions {
  std::optional<Band> band;            // default: params band
  std::optional<ModeLayout> layout;    // default: default_layout(n_modes, dim)
  std::uint64_t realization = 0;
};

/// Stationary draw of a field realization, deterministic in (seed, realization).
SpectralField synthesize(const SpectrumParams& p, int n_modes, std::uint64_t seed,
                         const SynthesisOptions& opts = {});

/// Closed-form structure tensor of U at separation r and time lag tau on a band
/// (nested adaptive quadrature, relative tolerance 1e-6).
Mat structure_function_exact(const SpectrumParams& p, const Vec& r, double tau,
                             std::optional<Band> band = std::nullopt);

struct TensorEstimate {
  Mat mean;
  Mat stderr_;
  std::size_t n_samples = 0;
};

/// Monte Carlo estimate of E[(U(t,r) - U(t,0)) (x) (U(t+tau,r) - U(t+tau,0))]
/// over n_samples independent realizations (symmetrized).
TensorEstimate structure_function_estimate(const SpectrumParams& p, int n_modes,
                                           const Vec& r, double tau,
                                           std::size_t n_samples, std::uint64_t seed,
                                           const SynthesisOptions& opts = {});

}  // namespace turbdisp
