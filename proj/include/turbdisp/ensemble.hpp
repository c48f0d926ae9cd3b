#pragma once

#include "turbdisp/params.hpp"
#include "turbdisp/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace turbdisp {

/// Pair-separation trajectories sampled on a common time grid.
struct PairEnsemble {
  std::string model;             // "colored" or "kraichnan"
  int dim = 2;
  std::size_t n_pairs = 0;
  std::vector<double> times;     // strictly increasing, times[0] = 0
  std::vector<double> data;      // [pair][time][component]
  std::vector<double> drift;     // same layout as data when recorded, else empty
  std::vector<std::uint8_t> absorbed;  // per pair, limit model only
  SpectrumParams params{};
  double kappa = 0.0;            // separation diffusivity used by the integrator
  double dt = 0.0;               // fixed step, or the cap for adaptive runs
  std::uint64_t seed = 0;
  std::uint64_t steps_taken = 0;

  std::size_t n_times() const noexcept { return times.size(); }
  std::span<const double> at(std::size_t pair, std::size_t ti) const {
    return {data.data() + (pair * times.size() + ti) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> at(std::size_t pair, std::size_t ti) {
    return {data.data() + (pair * times.size() + ti) * dim, static_cast<std::size_t>(dim)};
  }
  Vec position(std::size_t pair, std::size_t ti) const {
    Vec v(dim);
    const auto s = at(pair, ti);
    for (int i = 0; i < dim; ++i) v(i) = s[i];
    return v;
  }
};

/// 0 followed by n log-spaced times from t_min to t_max.
std::vector<double> log_time_grid(double t_min, double t_max, std::size_t n);

/// 0, h, 2h, ..., up to and including t_end (h = t_end / n).
std::vector<double> uniform_time_grid(double t_end, std::size_t n);

}  // namespace turbdisp
