#include "turbdisp/pairdisp.hpp"

#include "turbdisp/parallel.hpp"
#include "turbdisp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace turbdisp {

RescaleSpec RescaleSpec::white_noise(const SpectrumParams& p, double epsilon, double kappa_tilde,
                                     Band band) {
  return RescaleSpec{epsilon, 2.0 - p.alpha - p.beta, kappa_tilde, band};
}

RescaleSpec RescaleSpec::frozen(const SpectrumParams& p, double epsilon, double kappa_tilde,
                                Band band) {
  return RescaleSpec{epsilon, 1.0 - 0.5 * p.alpha, kappa_tilde, band};
}

double RescaleSpec::drift_prefactor(const SpectrumParams& p) const {
  return std::pow(epsilon, 2.0 * q + p.alpha - 2.0);
}

double RescaleSpec::time_speed(const SpectrumParams& p) const {
  return std::pow(epsilon, 2.0 * (q - p.beta));
}

double RescaleSpec::molecular_kappa() const { return std::pow(epsilon, 2.0 - 2.0 * q) * kappa_tilde; }

double RescaleSpec::small_parameter(const SpectrumParams& p) const {
  return std::pow(epsilon, p.beta - q);
}

double stable_dt(const SpectrumParams& p, Band band, double time_speed, double c_dt) {
  return c_dt / (time_speed * p.a * std::pow(band.k_max, 2.0 * p.beta));
}

namespace {

struct Dynamics {
  Band band;
  double drift_scale = 1.0;
  double time_speed = 1.0;
  double kappa = 0.0;
};

Vec random_rotation_of(const Vec& x0, RandomStream& rng) {
  const int d = static_cast<int>(x0.size());
  Vec dir(d);
  if (d == 2) {
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    dir << std::cos(th), std::sin(th);
  } else {
    for (int i = 0; i < d; ++i) dir(i) = rng.normal();
    dir.normalize();
  }
  return x0.norm() * dir;
}

PairEnsemble integrate(const SpectrumParams& p, const Dynamics& dyn, const Vec& x0,
                       std::size_t n_pairs, std::uint64_t seed, const PairSimOptions& opts) {
  validate(p);
  const int d = p.dim;
  if (x0.size() != d) throw ParameterError("simulate_pairs: x0 has the wrong dimension");
  if (n_pairs == 0) throw ParameterError("simulate_pairs: need at least one pair");
  if (!(dyn.kappa >= 0.0)) throw ParameterError("simulate_pairs: kappa must be non-negative");
  if (!(opts.dt > 0.0)) throw ParameterError("simulate_pairs: dt must be positive");
  const auto& times = opts.sample_times;
  if (times.size() < 2 || times.front() != 0.0)
    throw ParameterError("simulate_pairs: sample times must start at 0 and have an end");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ParameterError("simulate_pairs: times must increase");
  if (times.back() < opts.dt) throw ParameterError("simulate_pairs: t_end must be at least dt");
  const bool with_field = p.e0 > 0.0;
  if (with_field) {
    const double bound = stable_dt(p, dyn.band, dyn.time_speed, opts.c_dt);
    if (opts.dt > bound)
      throw StabilityError("dt = " + std::to_string(opts.dt) +
                               " does not resolve the fastest mode; stability bound is " +
                               std::to_string(bound),
                           bound);
  }

  PairEnsemble ens;
  ens.model = "colored";
  ens.dim = d;
  ens.n_pairs = n_pairs;
  ens.times = times;
  ens.data.assign(n_pairs * times.size() * d, 0.0);
  if (opts.record_drift) ens.drift.assign(ens.data.size(), 0.0);
  ens.params = p;
  ens.kappa = dyn.kappa;
  ens.dt = opts.dt;
  ens.seed = seed;
  std::vector<std::uint64_t> steps(n_pairs, 0);

  SynthesisOptions so;
  so.band = dyn.band;
  so.layout = opts.layout.value_or(default_layout(opts.n_modes, d));
  const int n_modes = so.layout->n_shells * so.layout->n_dirs;

  parallel_for(n_pairs, opts.threads, [&](std::size_t pair) {
    SynthesisOptions o = so;
    o.realization = opts.quenched ? 0 : pair;
    std::optional<SpectralField> field;
    if (with_field) field.emplace(synthesize(p, n_modes, seed, o));
    RandomStream noise(seed, {static_cast<std::uint64_t>(StreamRole::Brownian), pair});
    Vec x = x0;
    if (opts.random_direction) {
      RandomStream start(seed, {static_cast<std::uint64_t>(StreamRole::Start), pair});
      x = random_rotation_of(x0, start);
    }
    double t = 0.0;
    std::uint64_t count = 0;
    double u[3] = {0.0, 0.0, 0.0};
    double xs[3];
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const double target = times[ti];
      while (t < target) {
        double h = std::min(opts.dt, target - t);
        if (target - t - h < 1e-9 * opts.dt) h = target - t;
        for (int i = 0; i < d; ++i) xs[i] = x(i);
        if (field) {
          field->eval_increment(std::span<const double>(xs, d), std::span<double>(u, d));
          field->advance(dyn.time_speed * h);
        }
        const double sk = std::sqrt(dyn.kappa * h);
        for (int i = 0; i < d; ++i) {
          const double w = dyn.kappa > 0.0 ? noise.normal() : 0.0;
          x(i) += dyn.drift_scale * u[i] * h + sk * w;
        }
        t += h;
        ++count;
      }
      auto slot = ens.at(pair, ti);
      for (int i = 0; i < d; ++i) slot[i] = x(i);
      if (opts.record_drift) {
        double ud[3] = {0.0, 0.0, 0.0};
        if (field) {
          for (int i = 0; i < d; ++i) xs[i] = x(i);
          field->eval_increment(std::span<const double>(xs, d), std::span<double>(ud, d));
        }
        double* dslot = ens.drift.data() + (pair * times.size() + ti) * d;
        for (int i = 0; i < d; ++i) dslot[i] = dyn.drift_scale * ud[i];
      }
    }
    steps[pair] = count;
  });
  for (auto s : steps) ens.steps_taken += s;
  return ens;
}

}  // namespace

PairEnsemble simulate_pairs(const SpectrumParams& p, const Vec& x0, double kappa,
                            std::size_t n_pairs, std::uint64_t seed, const PairSimOptions& opts) {
  return integrate(p, Dynamics{p.band(), 1.0, 1.0, kappa}, x0, n_pairs, seed, opts);
}

PairEnsemble simulate_rescaled(const SpectrumParams& p, const RescaleSpec& rs, const Vec& x0,
                               std::size_t n_pairs, std::uint64_t seed, const PairSimOptions& opts) {
  if (!(rs.epsilon > 0.0)) throw ParameterError("rescale: epsilon must be positive");
  if (!(rs.kappa_tilde >= 0.0)) throw ParameterError("rescale: kappa~ must be non-negative");
  if (!(rs.band.k_min > 0.0) || !(rs.band.k_max > rs.band.k_min) || !std::isfinite(rs.band.k_max))
    throw ParameterError("rescale: band needs 0 < 1/L < K < inf");
  const Dynamics dyn{rs.band, rs.drift_prefactor(p), rs.time_speed(p), rs.kappa_tilde};
  return integrate(p, dyn, x0, n_pairs, seed, opts);
}

MsdSeries msd(const PairEnsemble& ens) {
  if (ens.n_pairs == 0) throw ParameterError("msd: empty ensemble");
  MsdSeries s;
  s.t = ens.times;
  s.y.assign(ens.n_times(), 0.0);
  s.se.assign(ens.n_times(), 0.0);
  const double n = static_cast<double>(ens.n_pairs);
  for (std::size_t ti = 0; ti < ens.n_times(); ++ti) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t pi = 0; pi < ens.n_pairs; ++pi) {
      double r2 = 0.0;
      for (double c : ens.at(pi, ti)) r2 += c * c;
      sum += r2;
      sum2 += r2 * r2;
    }
    const double mean = sum / n;
    s.y[ti] = mean;
    s.se[ti] = ens.n_pairs > 1 ? std::sqrt(std::max(0.0, (sum2 / n - mean * mean) / (n - 1.0))) : 0.0;
  }
  return s;
}

std::vector<DiffusivityBin> relative_diffusivity(const PairEnsemble& ens,
                                                 const std::vector<double>& edges,
                                                 const DiffusivityOptions& opts) {
  if (edges.size() < 2) throw ParameterError("relative_diffusivity: need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]) || !(edges[0] > 0.0))
      throw ParameterError("relative_diffusivity: bin edges must be positive and increasing");
  if (opts.max_lag < 1 || opts.jackknife_groups < 2 || opts.refinements < 0 ||
      !(opts.lag_fraction > 0.0))
    throw ParameterError("relative_diffusivity: need max_lag >= 1, at least 2 groups, "
                         "refinements >= 0 and lag_fraction > 0");
  const std::size_t nb = edges.size() - 1;
  const std::size_t ng = opts.jackknife_groups;
  const int d = ens.dim;
  // Per bin and group: sum tau * y, sum tau^2; per bin: contributing starts.
  std::vector<double> sty(nb * ng), stt(nb * ng);
  std::vector<std::size_t> count(nb);
  std::vector<double> cap(nb, std::numeric_limits<double>::infinity());

  auto accumulate = [&] {
    std::fill(sty.begin(), sty.end(), 0.0);
    std::fill(stt.begin(), stt.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t pi = 0; pi < ens.n_pairs; ++pi) {
      const std::size_t g = pi % ng;
      for (std::size_t ti = 0; ti + 1 < ens.n_times(); ++ti) {
        const auto x = ens.at(pi, ti);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        const double r = std::sqrt(r2);
        if (r < edges.front() || r >= edges.back()) continue;
        const auto b = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), r) - edges.begin() - 1);
        bool used = false;
        for (int m = 1; m <= opts.max_lag && ti + m < ens.n_times(); ++m) {
          const double tau = ens.times[ti + m] - ens.times[ti];
          if (tau > cap[b]) break;
          const auto y = ens.at(pi, ti + m);
          double along = 0.0;
          for (int i = 0; i < d; ++i) along += x[i] * (y[i] - x[i]);
          along /= r;
          sty[b * ng + g] += tau * along * along;
          stt[b * ng + g] += tau * tau;
          used = true;
        }
        if (used) ++count[b];
      }
    }
  };

  std::vector<DiffusivityBin> out(nb);
  auto estimate = [&] {
    for (std::size_t b = 0; b < nb; ++b) {
      DiffusivityBin& bin = out[b];
      bin = DiffusivityBin{};
      bin.r_lo = edges[b];
      bin.r_hi = edges[b + 1];
      bin.r_center = std::sqrt(edges[b] * edges[b + 1]);
      bin.samples = count[b];
      if (count[b] < opts.min_samples) continue;
      const auto jk = jackknife(ng, [&](std::size_t skip) {
        double a = 0.0, c = 0.0;
        for (std::size_t g = 0; g < ng; ++g) {
          if (g == skip) continue;
          a += sty[b * ng + g];
          c += stt[b * ng + g];
        }
        return c > 0.0 ? 0.5 * a / c : 0.0;
      });
      bin.value = jk.estimate;
      bin.stderr_ = jk.stderr_;
      bin.missing = !(bin.value > 0.0);
    }
  };

  accumulate();
  estimate();
  // Lags must stay short against the local diffusion time r^2 / (2 D) of the
  // bin, estimated from the previous pass.
  for (int it = 0; it < opts.refinements; ++it) {
    for (std::size_t b = 0; b < nb; ++b)
      cap[b] = out[b].missing ? std::numeric_limits<double>::infinity()
                              : opts.lag_fraction * edges[b] * edges[b] / (2.0 * out[b].value);
    accumulate();
    estimate();
  }
  return out;
}

Series diffusivity_series(const std::vector<DiffusivityBin>& bins) {
  Series s;
  for (const auto& b : bins) {
    if (b.missing) continue;
    s.t.push_back(b.r_center);
    s.y.push_back(b.value);
    s.se.push_back(b.stderr_);
  }
  return s;
}

Series drift_autocorrelation(const PairEnsemble& ens, std::size_t ref) {
  if (ens.drift.empty()) throw ParameterError("drift_autocorrelation: drift was not recorded");
  if (ref >= ens.n_times()) throw ParameterError("drift_autocorrelation: reference index out of range");
  const int d = ens.dim;
  auto drift_at = [&](std::size_t pi, std::size_t ti) {
    return ens.drift.data() + (pi * ens.n_times() + ti) * d;
  };
  double norm = 0.0;
  for (std::size_t pi = 0; pi < ens.n_pairs; ++pi) {
    const double* u = drift_at(pi, ref);
    for (int i = 0; i < d; ++i) norm += u[i] * u[i];
  }
  if (!(norm > 0.0)) throw ParameterError("drift_autocorrelation: drift vanishes at the reference time");
  Series s;
  for (std::size_t tj = ref; tj < ens.n_times(); ++tj) {
    double acc = 0.0;
    for (std::size_t pi = 0; pi < ens.n_pairs; ++pi) {
      const double* u = drift_at(pi, ref);
      const double* v = drift_at(pi, tj);
      for (int i = 0; i < d; ++i) acc += u[i] * v[i];
    }
    s.t.push_back(ens.times[tj] - ens.times[ref]);
    s.y.push_back(acc / norm);
  }
  return s;
}

}  // namespace turbdisp
