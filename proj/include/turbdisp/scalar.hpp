#pragma once

#include "turbdisp/params.hpp"
#include "turbdisp/pairdisp.hpp"
#include "turbdisp/statkit.hpp"
#include "turbdisp/synthfield.hpp"
#include "turbdisp/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace turbdisp {

/// Bounded, square-integrable initial scalar T0.
class Profile {
 public:
  enum class Kind { GaussianBump, Indicator, CosineBump, RadialTable };

  /// amplitude exp(-|x - c|^2 / (2 sigma^2)).
  static Profile gaussian(Vec center, double sigma, double amplitude = 1.0);
  /// amplitude on the closed ball of the given radius, 0 outside.
  static Profile indicator(Vec center, double radius, double amplitude = 1.0);
  /// amplitude cos^2(pi |x - c| / (2 radius)) inside the ball, 0 outside.
  static Profile cosine_bump(Vec center, double radius, double amplitude = 1.0);
  /// Piecewise-linear in |x - c| through (r_i, v_i), 0 beyond the last node.
  static Profile radial_table(Vec center, std::vector<double> r, std::vector<double> v);

  double operator()(const Vec& x) const;
  double sup() const noexcept { return sup_; }
  double inf() const noexcept { return inf_; }
  Kind kind() const noexcept { return kind_; }
  const Vec& center() const noexcept { return center_; }
  double width() const noexcept { return width_; }
  double amplitude() const noexcept { return amplitude_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::GaussianBump;
  Vec center_;
  double width_ = 1.0;
  double amplitude_ = 1.0;
  std::vector<double> table_r_, table_v_;
  double sup_ = 0.0, inf_ = 0.0;
};

/// Uniform box of cells; points sit at cell centres.
struct BoxGrid {
  Vec lo;
  double spacing = 1.0;
  std::vector<int> counts;  // cells per axis

  int dim() const noexcept { return static_cast<int>(counts.size()); }
  std::size_t size() const noexcept;
  Vec point(std::size_t index) const;
  std::vector<Vec> points() const;
  double cell_volume() const;
  /// Centred box of n^dim cells covering [c - h, c + h]^dim.
  static BoxGrid centered(const Vec& center, double half_width, int n);
};

struct ScalarProbe {
  Profile initial;
  std::vector<Vec> points;
  double kappa_tilde = 0.0;
  std::size_t mc_paths = 1;  // forced to 1 when kappa_tilde = 0
};

/// Colored transport: the rescaled field eps^(2q+alpha-2) V(eps^(2(q-beta)) t, x)
/// of one field realization.
struct ColoredTransport {
  SpectrumParams params;
  RescaleSpec rescale;
  int n_modes = 256;
  std::optional<ModeLayout> layout;
  double dt = 1e-3;
  double c_dt = 0.1;
};

/// White-noise transport: increments sqrt(2 h / a) G with G a Gaussian
/// field of spectral exponent alpha + beta on the band, redrawn every step
/// and evaluated at the step midpoint.
struct WhiteTransport {
  SpectrumParams params;
  Band band;
  int n_modes = 256;
  std::optional<ModeLayout> layout;
  double dt = 1e-3;
};

using Transport = std::variant<ColoredTransport, WhiteTransport>;

/// Endpoints Phi_0(x) of the backward flow, [point][path][component].
struct FlowSample {
  int dim = 2;
  std::size_t n_points = 0;
  std::size_t n_paths = 0;
  double t = 0.0;
  std::vector<double> endpoints;
  Vec endpoint(std::size_t point, std::size_t path) const;
};

/// Integrates dPhi = -drift ds + sqrt(kappa~) dw from s = t down to 0 from
/// every point, n_paths Brownian replicas each, all in one field
/// realization. Each worker replays the field from the seed.
FlowSample backward_flow(const Transport& transport, const std::vector<Vec>& points,
                         double kappa_tilde, std::size_t n_paths, double t, std::uint64_t seed,
                         unsigned threads = 1);

struct ScalarValues {
  double t = 0.0;
  std::vector<double> value;
  std::vector<double> stderr_;
};

/// Per point, the mean of f over the replica endpoints with its standard
/// error; the mean is clamped to the range of its samples.
ScalarValues average_over_flow(const FlowSample& flow, const std::function<double(const Vec&)>& f);

struct ScalarOptions {
  unsigned threads = 1;
  /// Applied to each estimate after averaging. Test-only.
  std::function<double(double)> estimator_hook;
};

/// T(t, x) = M[T0(Phi_0(x))] at the probe points.
ScalarValues evaluate_scalar(const Transport& transport, const ScalarProbe& probe, double t,
                             std::uint64_t seed, const ScalarOptions& opts = {});

struct MaxPrinciple {
  bool pass = false;
  double margin = 0.0;  // min over points of the distance to the violated side
};

/// Every value must lie in [inf T0, sup T0].
MaxPrinciple max_principle_check(const ScalarValues& values, const ScalarProbe& probe);

struct EnergyReport {
  double t = 0.0;
  double l2 = 0.0;  // ||T_t||^2
  double l2_stderr = 0.0;
  double linf = 0.0;
  double initial_l2 = 0.0;
  double dissipation = 0.0;  // ||T0||^2 - ||T_t||^2
  double dissipation_stderr = 0.0;
  double discretization_error = 0.0;  // folded into dissipation_stderr
  double tail_fraction = 0.0;  // share of ||T_t||^2 in the outer cell layer
  bool positive_dissipation_expected = false;
  std::vector<std::string> warnings;
};

/// Midpoint-rule norms on the grid; Monte Carlo errors combined with the
/// spread between the h and 2h rules and a caller-supplied time
/// discretization error. Squared estimates are debiased by their variance.
EnergyReport energy_report(const ScalarValues& values, const BoxGrid& grid,
                           const ScalarProbe& probe, double tail_tolerance = 1e-4,
                           double discretization_error = 0.0);

/// Energy report at t whose discretization error is the change of the
/// residual when the transport step is doubled. The fine-step values are
/// copied to fine_values when given.
EnergyReport energy_with_step_doubling(const Transport& transport, const ScalarProbe& probe,
                                       const BoxGrid& grid, double t, std::uint64_t seed,
                                       unsigned threads = 1, double tail_tolerance = 1e-4,
                                       ScalarValues* fine_values = nullptr);

struct FunctionOfScalarReport {
  double max_abs_difference = 0.0;
  std::size_t n_points = 0;
  bool pass = false;  // max_abs_difference <= 1e-10
};

/// phi(T(t, x)) against the scalar started from phi(T0) on the same flow
/// realization. Needs kappa~ = 0.
FunctionOfScalarReport function_of_scalar_check(const Transport& transport,
                                                const ScalarProbe& probe,
                                                const std::function<double(double)>& phi,
                                                double t, std::uint64_t seed, unsigned threads = 1);

/// Two-sample test of the values against T0 at the same points.
TwoSampleResult measure_preservation(const ScalarValues& values, const ScalarProbe& probe,
                                     std::uint64_t seed);

/// Exact solution with no field: Gaussian bump smoothed by the heat kernel
/// of diffusivity kappa~ / 2.
double heat_kernel_gaussian(const Profile& bump, const Vec& x, double kappa_tilde, double t);

}  // namespace turbdisp
