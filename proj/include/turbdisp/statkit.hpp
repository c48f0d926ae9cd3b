#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace turbdisp {

/// Tabulated curve y(t) with per-point standard errors (empty se = unknown).
struct Series {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> se;
};

/// Closed interval on the abscissa.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// y ~ prefactor * t^exponent.
struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double ci_half_width = 0.0;  // 95 %
  Window window{};
  std::size_t n_points = 0;
  double max_abs_log_residual = 0.0;
  double reduced_chi2 = 0.0;   // 0 when the fit is unweighted
  bool weighted = false;
};

/// Least squares on (log t, log y) over the points inside the window. With
/// standard errors for every point the weights are (y / se)^2 and the CI
/// comes from the weighted covariance inflated by max(1, reduced chi^2);
/// otherwise ordinary least squares with a Student-t interval. Needs at
/// least 8 points with t > 0 and y > 0 in the window.
PowerLawFit fit_power_law(const Series& s, Window w);

/// RMS of log a - log b over log t in the window, both curves linearly
/// interpolated in log-log coordinates on the union of their grids.
double curve_distance(const Series& a, const Series& b, Window w);

/// Kolmogorov-Smirnov distance between empirical distributions.
double ks_statistic(std::span<const double> a, std::span<const double> b);

struct TwoSampleResult {
  double statistic = 0.0;
  double null_mean = 0.0;
  double null_sd = 0.0;
  double threshold = 0.0;  // null_mean + 3 null_sd
  bool pass = false;
};

/// KS statistic against a permutation null (seeded, n_permutations relabelings
/// of the pooled sample); passes when the statistic is within 3 null standard
/// deviations above the null mean.
TwoSampleResult two_sample_match(std::span<const double> a, std::span<const double> b,
                                 std::uint64_t seed, int n_permutations = 200);

/// Curve distances along a decreasing epsilon sweep.
struct ConvergenceTrace {
  std::vector<double> epsilons;
  std::vector<double> distances;
  bool strictly_decreasing = false;
};

ConvergenceTrace make_trace(std::vector<double> epsilons, std::vector<double> distances);

/// Mean and jackknife standard error of a statistic computed on leave-one-
/// block-out subsets. `stat(skip)` evaluates the statistic with block `skip`
/// removed, or on all data when skip == n_blocks.
struct JackknifeResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

template <class Stat>
JackknifeResult jackknife(std::size_t n_blocks, Stat&& stat) {
  JackknifeResult r;
  r.estimate = stat(n_blocks);
  if (n_blocks < 2) return r;
  double mean = 0.0;
  std::vector<double> loo(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    loo[b] = stat(b);
    mean += loo[b];
  }
  mean /= static_cast<double>(n_blocks);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(n_blocks);
  r.stderr_ = std::sqrt((n - 1.0) / n * ss);
  return r;
}

}  // namespace turbdisp
