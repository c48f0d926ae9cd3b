#include "turbdisp/kraichnan.hpp"

#include "turbdisp/parallel.hpp"
#include "turbdisp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace turbdisp {

namespace {

constexpr double kTablePerDecade = 24.0;
constexpr double kTableMargin = 1e3;  // decades beyond each band edge: log10(kTableMargin)
constexpr double kJitter = 1e-14;

std::string describe(const Vec& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

// Catmull-Rom interpolation on a uniform grid, clamped at the ends.
double cubic_at(const std::vector<double>& f, double s) {
  const auto n = static_cast<long>(f.size());
  const long i = std::clamp(static_cast<long>(std::floor(s)), 1L, n - 3);
  const double u = s - static_cast<double>(i);
  const double p0 = f[i - 1], p1 = f[i], p2 = f[i + 1], p3 = f[i + 2];
  return p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)));
}

// Isotropic matrix L x^x^T + T (I - x^x^T).
Mat isotropic(const Vec& xh, double l, double t) {
  Mat m = Mat::Identity(xh.size(), xh.size()) * t;
  m += (l - t) * (xh * xh.transpose());
  return m;
}

}  // namespace

KraichnanOracle::KraichnanOracle(const SpectrumParams& p, double kappa0, std::optional<Band> band)
    : kappa0_(kappa0), rate_a_(p.a), band_(band) {
  if (p.dim != 2 && p.dim != 3) throw ParameterError("kraichnan: dim must be 2 or 3");
  if (!(p.e0 >= 0.0)) throw ParameterError("kraichnan: e0 must be non-negative");
  if (!(p.a > 0.0)) throw ParameterError("kraichnan: a must be positive");
  if (!(kappa0 >= 0.0)) throw ParameterError("kraichnan: kappa0 must be non-negative");
  kernel_.exponent = p.alpha + p.beta;
  kernel_.e0 = p.e0;
  kernel_.rate_a = p.a;
  kernel_.rate_beta = p.beta;
  kernel_.dim = p.dim;
  if (!band) {
    if (!(kernel_.exponent > 1.0 && kernel_.exponent < 2.0))
      throw ParameterError("kraichnan: unbounded band needs 1 < alpha + beta < 2");
    kernel_.band = Band{0.0, std::numeric_limits<double>::infinity()};
    closed_coef_ = p.e0 / c_alpha(kernel_.exponent, p.dim);
    return;
  }
  if (!(band->k_min > 0.0) || !(band->k_max > band->k_min))
    throw ParameterError("kraichnan: band needs 0 < 1/L < K");
  kernel_.band = *band;
  table_ = std::make_shared<Table>();
}

const KraichnanOracle::Table& KraichnanOracle::table() const {
  std::call_once(table_->built, [this] {
    Table& tb = *table_;
    const Band& band = kernel_.band;
    const double r_lo = std::isfinite(band.k_max) ? 1.0 / (band.k_max * kTableMargin)
                                                  : 1.0 / (band.k_min * kTableMargin * kTableMargin);
    const double r_hi = kTableMargin / band.k_min;
    tb.log_step = std::log(10.0) / kTablePerDecade;
    tb.log_r0 = std::log(r_lo);
    const auto n = static_cast<std::size_t>(std::ceil((std::log(r_hi) - tb.log_r0) / tb.log_step)) + 1;
    tb.log_l.resize(n);
    tb.log_t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::exp(tb.log_r0 + i * tb.log_step);
      const IsotropicPair s = structure_components(kernel_, r, 0.0, 1e-8);
      tb.log_l[i] = std::log(s.longitudinal);
      tb.log_t[i] = std::log(s.transverse);
    }
  });
  return *table_;
}

IsotropicPair KraichnanOracle::parts(double r) const {
  r = std::abs(r);
  if (r == 0.0 || kernel_.e0 == 0.0) return {};
  if (!band_) {
    const double two_eta = 2.0 * eta();
    const double base = closed_coef_ * std::pow(r, two_eta);
    return {base, base * (1.0 + two_eta / (kernel_.dim - 1))};
  }
  const Table& tb = table();
  const double s = (std::log(r) - tb.log_r0) / tb.log_step;
  const double last = static_cast<double>(tb.log_l.size() - 1);
  // Outside the table: power law with the log-slope of the edge segment.
  auto extrapolate = [&](const std::vector<double>& f, std::size_t i0, double ds) {
    return std::exp(f[i0] + (f[i0 + 1] - f[i0]) * ds);
  };
  if (s < 0.0) return {extrapolate(tb.log_l, 0, s), extrapolate(tb.log_t, 0, s)};
  if (s > last) {
    const std::size_t i0 = tb.log_l.size() - 2;
    return {extrapolate(tb.log_l, i0, s - i0), extrapolate(tb.log_t, i0, s - i0)};
  }
  return {std::exp(cubic_at(tb.log_l, s)), std::exp(cubic_at(tb.log_t, s))};
}

Mat KraichnanOracle::gamma1(const Vec& x, const Vec& y) const {
  if (x.size() != kernel_.dim || y.size() != kernel_.dim)
    throw ParameterError("gamma1: dimension mismatch");
  auto s = [&](const Vec& v) -> Mat {
    const double r = v.norm();
    if (r == 0.0) return Mat::Zero(kernel_.dim, kernel_.dim);
    return assemble_isotropic(v, structure_components(kernel_, r, 0.0, 1e-6));
  };
  if (x.norm() == 0.0 || y.norm() == 0.0) return Mat::Zero(kernel_.dim, kernel_.dim);
  if ((x - y).norm() == 0.0) return s(x);
  return 0.5 * (s(x) + s(y) - s(x - y));
}

Mat KraichnanOracle::gamma1_closed(const Vec& x) const {
  if (band_) throw ParameterError("gamma1_closed: needs the unbounded band");
  const double r = x.norm();
  if (r == 0.0) return Mat::Zero(x.size(), x.size());
  const IsotropicPair pr = parts(r);
  return isotropic(x / r, pr.longitudinal, pr.transverse);
}

Mat KraichnanOracle::b_bar(const Vec& x) const {
  const double r = x.norm();
  if (r == 0.0) return Mat::Zero(x.size(), x.size());
  const IsotropicPair pr = parts(r);
  return isotropic(x / r, pr.longitudinal, pr.transverse);
}

Mat KraichnanOracle::gamma1_fast(const Vec& x, const Vec& y) const {
  if (x.norm() == 0.0 || y.norm() == 0.0) return Mat::Zero(x.size(), x.size());
  return 0.5 * (b_bar(x) + b_bar(y) - b_bar(x - y));
}

Mat KraichnanOracle::diffusion(const Vec& x) const {
  return kappa0_ * Mat::Identity(x.size(), x.size()) + (2.0 / rate_a_) * b_bar(x);
}

double KraichnanOracle::longitudinal_diffusivity(const Vec& x) const {
  return 0.5 * kappa0_ + parts(x.norm()).longitudinal / rate_a_;
}

Mat gamma1_closed(const SpectrumParams& p, const Vec& x) {
  if (x.size() != p.dim) throw ParameterError("gamma1_closed: dimension mismatch");
  return KraichnanOracle(p, 0.0).gamma1_closed(x);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const double tr = m.trace();
  if (tr == 0.0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw FactorizationError("psd_sqrt: eigen decomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-12 * std::abs(tr))
    throw FactorizationError("psd_sqrt: matrix is not positive semi-definite (eigenvalue " +
                             std::to_string(ev.minCoeff()) + ")");
  const double floor = kJitter * std::abs(tr);
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), floor));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

PairEnsemble simulate_limit_pairs(const KraichnanOracle& oracle, const Vec& x0,
                                  std::size_t n_pairs, std::uint64_t seed,
                                  const LimitSimOptions& opts) {
  const int d = oracle.dim();
  if (x0.size() != d) throw ParameterError("simulate_limit_pairs: x0 has the wrong dimension");
  if (x0.norm() == 0.0) throw ParameterError("simulate_limit_pairs: x0 must be non-zero");
  if (n_pairs == 0) throw ParameterError("simulate_limit_pairs: need at least one pair");
  const auto& times = opts.sample_times;
  if (times.size() < 2 || times.front() != 0.0)
    throw ParameterError("simulate_limit_pairs: sample times must start at 0 and have an end");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ParameterError("simulate_limit_pairs: times must increase");
  if (!(opts.step_factor > 0.0)) throw ParameterError("simulate_limit_pairs: step factor must be positive");
  const double dt_max = opts.dt_max > 0.0 ? opts.dt_max : times.back() / 1000.0;
  const double dt_min = 1e-6 * dt_max;
  const double r_absorb = opts.absorb_factor * x0.norm();

  PairEnsemble ens;
  ens.model = "kraichnan";
  ens.dim = d;
  ens.n_pairs = n_pairs;
  ens.times = times;
  ens.data.assign(n_pairs * times.size() * d, 0.0);
  ens.absorbed.assign(n_pairs, 0);
  ens.kappa = oracle.kappa0();
  ens.dt = dt_max;
  ens.seed = seed;
  std::vector<std::uint64_t> steps(n_pairs, 0);

  parallel_for(n_pairs, opts.threads, [&](std::size_t pair) {
    RandomStream rng(seed, {static_cast<std::uint64_t>(StreamRole::Limit), pair});
    Vec x = x0;
    double t = 0.0;
    bool absorbed = false;
    std::uint64_t count = 0;
    Vec xi(d);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const double target = times[ti];
      while (!absorbed && t < target) {
        const double r = x.norm();
        const IsotropicPair pr = oracle.parts(r);
        const double scale = 2.0 / oracle.kernel().rate_a;
        double dl = oracle.kappa0() + scale * pr.longitudinal;
        double dtr = oracle.kappa0() + scale * pr.transverse;
        const double tr = dl + (d - 1) * dtr;
        const double lam = std::max(dl, dtr);
        double dt = std::min(dt_max, target - t);
        if (lam > 0.0) dt = std::min(dt, std::max(dt_min, opts.step_factor * r * r / lam));
        if (target - t - dt < 1e-12 * target) dt = target - t;
        if (tr > 0.0) {
          if (dl < -1e-12 * tr || dtr < -1e-12 * tr)
            throw FactorizationError("limit diffusion is not PSD at x = " + describe(x));
          dl = std::max(dl, kJitter * tr);
          dtr = std::max(dtr, kJitter * tr);
          for (int i = 0; i < d; ++i) xi(i) = rng.normal();
          const Vec xh = x / r;
          const double sl = std::sqrt(dl * dt), st = std::sqrt(dtr * dt);
          const double along = xh.dot(xi);
          x += st * xi + (sl - st) * along * xh;
        }
        t += dt;
        ++count;
        if (x.norm() < r_absorb) absorbed = true;
      }
      auto slot = ens.at(pair, ti);
      for (int i = 0; i < d; ++i) slot[i] = x(i);
    }
    ens.absorbed[pair] = absorbed ? 1 : 0;
    steps[pair] = count;
  });
  for (auto s : steps) ens.steps_taken += s;
  return ens;
}

Eigen::MatrixXd two_point_diffusion(const KraichnanOracle& oracle, const Vec& x1, const Vec& x2) {
  const int d = oracle.dim();
  const double scale = 2.0 / oracle.kernel().rate_a;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  const Mat g11 = oracle.b_bar(x1);
  const Mat g22 = oracle.b_bar(x2);
  const Mat g12 = oracle.gamma1_fast(x1, x2);
  m.block(0, 0, d, d) = scale * g11 + oracle.kappa0() * Eigen::MatrixXd::Identity(d, d);
  m.block(d, d, d, d) = scale * g22 + oracle.kappa0() * Eigen::MatrixXd::Identity(d, d);
  m.block(0, d, d, d) = scale * g12;
  m.block(d, 0, d, d) = scale * g12.transpose();
  return m;
}

TwoPointEstimate two_point_moment(const KraichnanOracle& oracle, const TwoPointFunction& phi,
                                  const std::vector<std::pair<Vec, Vec>>& points, double t,
                                  std::size_t n_paths, std::uint64_t seed, double step_factor,
                                  unsigned threads) {
  if (!(t >= 0.0)) throw ParameterError("two_point_moment: t must be non-negative");
  if (n_paths < 2) throw ParameterError("two_point_moment: need at least 2 paths");
  const int d = oracle.dim();
  TwoPointEstimate est;
  est.value.assign(points.size(), 0.0);
  est.stderr_.assign(points.size(), 0.0);
  parallel_for(points.size(), threads, [&](std::size_t pi) {
    const Vec& a0 = points[pi].first;
    const Vec& b0 = points[pi].second;
    if (a0.size() != d || b0.size() != d) throw ParameterError("two_point_moment: dimension mismatch");
    if (t == 0.0) {
      est.value[pi] = phi(a0, b0);
      return;
    }
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd xi(2 * d);
    // Points closer than r_merge move together and do not limit the step.
    const double r_merge = 1e-6 * std::max({a0.norm(), b0.norm(), (a0 - b0).norm()});
    const double dt_max = t / 200.0;
    const double scale = 2.0 / oracle.kernel().rate_a;
    for (std::size_t j = 0; j < n_paths; ++j) {
      RandomStream rng(seed, {static_cast<std::uint64_t>(StreamRole::Limit), 1, pi, j});
      Vec a = a0, b = b0;
      double s = 0.0;
      while (s < t) {
        const bool merged = (a - b).norm() <= r_merge;
        const Eigen::MatrixXd dm = two_point_diffusion(oracle, a, b);
        // Each of |x1|, |x2|, |x1 - x2| moves by a small fraction of itself.
        double dt = std::min(t - s, dt_max);
        for (double r : {a.norm(), b.norm(), (a - b).norm()}) {
          if (r <= r_merge) continue;
          const IsotropicPair pr = oracle.parts(r);
          const double lam = oracle.kappa0() + scale * std::max(pr.longitudinal, pr.transverse);
          if (lam > 0.0) dt = std::min(dt, std::max(1e-6 * dt_max, step_factor * r * r / lam));
        }
        if (t - s - dt < 1e-12 * t) dt = t - s;
        Eigen::MatrixXd root;
        try {
          root = psd_sqrt(dm * dt);
        } catch (const FactorizationError& e) {
          throw FactorizationError(std::string(e.what()) + " at x1 = " + describe(a) +
                                   ", x2 = " + describe(b));
        }
        for (int i = 0; i < 2 * d; ++i) xi(i) = rng.normal();
        const Eigen::VectorXd step = root * xi;
        a += step.head(d);
        // Coalesced points share the increment exactly.
        if (merged) b = a;
        else b += step.tail(d);
        s += dt;
      }
      const double v = phi(a, b);
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(n_paths);
    const double mean = sum / n;
    est.value[pi] = mean;
    est.stderr_[pi] = std::sqrt(std::max(0.0, (sum2 / n - mean * mean) / (n - 1.0)));
  });
  return est;
}

}  // namespace turbdisp
