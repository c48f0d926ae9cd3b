#include "turbdisp/scalar.hpp"

#include "turbdisp/parallel.hpp"
#include "turbdisp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace turbdisp {

namespace {

void check_center(const Vec& c) {
  if (c.size() != 2 && c.size() != 3) throw ParameterError("profile: centre must be 2-D or 3-D");
}

}  // namespace

Profile Profile::gaussian(Vec center, double sigma, double amplitude) {
  check_center(center);
  if (!(sigma > 0.0)) throw ParameterError("profile: sigma must be positive");
  Profile p;
  p.kind_ = Kind::GaussianBump;
  p.center_ = std::move(center);
  p.width_ = sigma;
  p.amplitude_ = amplitude;
  p.sup_ = std::max(0.0, amplitude);
  p.inf_ = std::min(0.0, amplitude);
  return p;
}

Profile Profile::indicator(Vec center, double radius, double amplitude) {
  Profile p = gaussian(std::move(center), radius, amplitude);
  p.kind_ = Kind::Indicator;
  return p;
}

Profile Profile::cosine_bump(Vec center, double radius, double amplitude) {
  Profile p = gaussian(std::move(center), radius, amplitude);
  p.kind_ = Kind::CosineBump;
  return p;
}

Profile Profile::radial_table(Vec center, std::vector<double> r, std::vector<double> v) {
  check_center(center);
  if (r.size() < 2 || r.size() != v.size()) throw ParameterError("profile: table needs >= 2 matching nodes");
  if (r.front() != 0.0) throw ParameterError("profile: table must start at r = 0");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1])) throw ParameterError("profile: table radii must increase");
  for (double x : v)
    if (!std::isfinite(x)) throw ParameterError("profile: table values must be finite");
  Profile p;
  p.kind_ = Kind::RadialTable;
  p.center_ = std::move(center);
  p.width_ = r.back();
  p.amplitude_ = *std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  p.sup_ = std::max(0.0, *std::max_element(v.begin(), v.end()));
  p.inf_ = std::min(0.0, *std::min_element(v.begin(), v.end()));
  p.table_r_ = std::move(r);
  p.table_v_ = std::move(v);
  return p;
}

double Profile::operator()(const Vec& x) const {
  const double r = (x - center_).norm();
  switch (kind_) {
    case Kind::GaussianBump:
      return amplitude_ * std::exp(-0.5 * r * r / (width_ * width_));
    case Kind::Indicator:
      return r <= width_ ? amplitude_ : 0.0;
    case Kind::CosineBump: {
      if (r >= width_) return 0.0;
      const double c = std::cos(0.5 * std::numbers::pi * r / width_);
      return amplitude_ * c * c;
    }
    case Kind::RadialTable: {
      if (r > table_r_.back()) return 0.0;
      const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
      if (it == table_r_.end()) return table_v_.back();
      const std::size_t i = static_cast<std::size_t>(it - table_r_.begin());
      const double u = (r - table_r_[i - 1]) / (table_r_[i] - table_r_[i - 1]);
      return table_v_[i - 1] + u * (table_v_[i] - table_v_[i - 1]);
    }
  }
  return 0.0;
}

std::string Profile::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind_) {
    case Kind::GaussianBump: os << "gaussian sigma=" << width_; break;
    case Kind::Indicator: os << "indicator radius=" << width_; break;
    case Kind::CosineBump: os << "cosine_bump radius=" << width_; break;
    case Kind::RadialTable: os << "radial_table nodes=" << table_r_.size(); break;
  }
  if (kind_ != Kind::RadialTable) os << " amplitude=" << amplitude_;
  return os.str();
}

std::size_t BoxGrid::size() const noexcept {
  std::size_t n = counts.empty() ? 0 : 1;
  for (int c : counts) n *= static_cast<std::size_t>(std::max(c, 0));
  return n;
}

Vec BoxGrid::point(std::size_t index) const {
  Vec x(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto c = static_cast<std::size_t>(counts[i]);
    x(i) = lo(i) + (static_cast<double>(index % c) + 0.5) * spacing;
    index /= c;
  }
  return x;
}

std::vector<Vec> BoxGrid::points() const {
  std::vector<Vec> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
  return out;
}

double BoxGrid::cell_volume() const { return std::pow(spacing, dim()); }

BoxGrid BoxGrid::centered(const Vec& center, double half_width, int n) {
  if (n < 2 || !(half_width > 0.0)) throw ParameterError("grid: need n >= 2 and half_width > 0");
  BoxGrid g;
  g.lo = center - Vec::Constant(center.size(), half_width);
  g.spacing = 2.0 * half_width / n;
  g.counts.assign(static_cast<std::size_t>(center.size()), n);
  return g;
}

Vec FlowSample::endpoint(std::size_t point, std::size_t path) const {
  Vec v(dim);
  const double* p = endpoints.data() + (point * n_paths + path) * dim;
  for (int i = 0; i < dim; ++i) v(i) = p[i];
  return v;
}

namespace {

// Drives the shared field backward in time and reports one step at a time.
class BackwardDriver {
 public:
  BackwardDriver(const Transport& tr, std::uint64_t seed) {
    if (const auto* c = std::get_if<ColoredTransport>(&tr)) {
      const SpectrumParams& p = c->params;
      validate(p);
      const RescaleSpec& rs = c->rescale;
      if (!(rs.epsilon > 0.0) || !(rs.band.k_min > 0.0) || !(rs.band.k_max > rs.band.k_min) ||
          !std::isfinite(rs.band.k_max))
        throw ParameterError("scalar: colored transport needs epsilon > 0 and 0 < 1/L < K < inf");
      dt_ = c->dt;
      drift_scale_ = rs.drift_prefactor(p);
      time_speed_ = rs.time_speed(p);
      if (p.e0 > 0.0) {
        const double bound = stable_dt(p, rs.band, time_speed_, c->c_dt);
        if (dt_ > bound)
          throw StabilityError("scalar: dt = " + std::to_string(dt_) +
                                   " does not resolve the fastest mode; stability bound is " +
                                   std::to_string(bound),
                               bound);
        SynthesisOptions so;
        so.band = rs.band;
        so.layout = c->layout.value_or(default_layout(c->n_modes, p.dim));
        field_.emplace(synthesize(p, so.layout->n_shells * so.layout->n_dirs, seed, so));
      }
    } else {
      const auto& w = std::get<WhiteTransport>(tr);
      SpectrumParams p = w.params;
      validate(p);
      if (!(w.band.k_min > 0.0) || !(w.band.k_max > w.band.k_min) || !std::isfinite(w.band.k_max))
        throw ParameterError("scalar: white transport needs 0 < 1/L < K < inf");
      dt_ = w.dt;
      white_ = true;
      white_rate_ = p.a;
      p.alpha = p.alpha + p.beta;
      if (p.e0 > 0.0) {
        SynthesisOptions so;
        so.band = w.band;
        so.layout = w.layout.value_or(default_layout(w.n_modes, p.dim));
        field_.emplace(synthesize(p, so.layout->n_shells * so.layout->n_dirs, seed, so));
      }
    }
    if (!(dt_ > 0.0)) throw ParameterError("scalar: dt must be positive");
  }

  double dt() const noexcept { return dt_; }
  bool has_field() const noexcept { return field_.has_value(); }

  // Prepares the field for a step of length h ending (in backward time) at s - h.
  void begin_step(double h) {
    h_ = h;
    if (field_ && white_) field_->advance(std::numeric_limits<double>::infinity());
  }

  // Displacement of one point over the current step (without molecular noise).
  void displacement(const double* x, double* out, int d) const {
    for (int i = 0; i < d; ++i) out[i] = 0.0;
    if (!field_) return;
    double u[3], mid[3];
    if (white_) {
      const double s = std::sqrt(2.0 * h_ / white_rate_);
      field_->eval_increment(std::span<const double>(x, d), std::span<double>(u, d));
      for (int i = 0; i < d; ++i) mid[i] = x[i] - 0.5 * s * u[i];
      field_->eval_increment(std::span<const double>(mid, d), std::span<double>(u, d));
      for (int i = 0; i < d; ++i) out[i] = -s * u[i];
    } else {
      field_->eval_increment(std::span<const double>(x, d), std::span<double>(u, d));
      for (int i = 0; i < d; ++i) out[i] = -drift_scale_ * h_ * u[i];
    }
  }

  void end_step() {
    if (field_ && !white_) field_->advance(time_speed_ * h_);
  }

 private:
  std::optional<SpectralField> field_;
  bool white_ = false;
  double white_rate_ = 1.0;
  double dt_ = 1e-3;
  double drift_scale_ = 1.0;
  double time_speed_ = 1.0;
  double h_ = 0.0;
};

int transport_dim(const Transport& tr) {
  return std::visit([](const auto& t) { return t.params.dim; }, tr);
}

}  // namespace

FlowSample backward_flow(const Transport& transport, const std::vector<Vec>& points,
                         double kappa_tilde, std::size_t n_paths, double t, std::uint64_t seed,
                         unsigned threads) {
  if (!(t >= 0.0)) throw ParameterError("scalar: t must be non-negative");
  if (!(kappa_tilde >= 0.0)) throw ParameterError("scalar: kappa~ must be non-negative");
  if (n_paths == 0) throw ParameterError("scalar: need at least one path");
  const int d = transport_dim(transport);
  for (const Vec& x : points)
    if (x.size() != d) throw ParameterError("scalar: point dimension does not match the transport");
  if (kappa_tilde == 0.0) n_paths = 1;

  FlowSample flow;
  flow.dim = d;
  flow.n_points = points.size();
  flow.n_paths = n_paths;
  flow.t = t;
  flow.endpoints.resize(points.size() * n_paths * d);
  for (std::size_t pi = 0; pi < points.size(); ++pi)
    for (std::size_t j = 0; j < n_paths; ++j)
      for (int i = 0; i < d; ++i) flow.endpoints[(pi * n_paths + j) * d + i] = points[pi](i);
  BackwardDriver probe_driver(transport, seed);  // validates before any work
  if (t == 0.0 || (!probe_driver.has_field() && kappa_tilde == 0.0)) return flow;

  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(points.size(), 1)));
  const std::size_t per = (points.size() + workers - 1) / workers;
  const double sk_scale = std::sqrt(kappa_tilde);
  parallel_for(workers, workers, [&](std::size_t w) {
    const std::size_t begin = w * per;
    const std::size_t end = std::min(points.size(), begin + per);
    if (begin >= end) return;
    BackwardDriver drv(transport, seed);
    std::vector<RandomStream> noise;
    if (kappa_tilde > 0.0) {
      noise.reserve((end - begin) * n_paths);
      for (std::size_t pi = begin; pi < end; ++pi)
        for (std::size_t j = 0; j < n_paths; ++j)
          noise.emplace_back(seed, std::initializer_list<std::uint64_t>{
                                       static_cast<std::uint64_t>(StreamRole::Scalar), pi, j});
    }
    double s = t;
    double disp[3];
    while (s > 0.0) {
      double h = std::min(drv.dt(), s);
      if (s - h < 1e-9 * drv.dt()) h = s;
      drv.begin_step(h);
      const double sk = sk_scale * std::sqrt(h);
      for (std::size_t pi = begin; pi < end; ++pi) {
        for (std::size_t j = 0; j < n_paths; ++j) {
          double* x = flow.endpoints.data() + (pi * n_paths + j) * d;
          drv.displacement(x, disp, d);
          if (kappa_tilde > 0.0) {
            RandomStream& rng = noise[(pi - begin) * n_paths + j];
            for (int i = 0; i < d; ++i) disp[i] += sk * rng.normal();
          }
          for (int i = 0; i < d; ++i) x[i] += disp[i];
        }
      }
      drv.end_step();
      s -= h;
    }
  });
  return flow;
}

ScalarValues average_over_flow(const FlowSample& flow, const std::function<double(const Vec&)>& f) {
  ScalarValues out;
  out.t = flow.t;
  out.value.assign(flow.n_points, 0.0);
  out.stderr_.assign(flow.n_points, 0.0);
  const double n = static_cast<double>(flow.n_paths);
  std::vector<double> samples;
  samples.reserve(flow.n_paths);
  for (std::size_t pi = 0; pi < flow.n_points; ++pi) {
    samples.clear();
    for (std::size_t j = 0; j < flow.n_paths; ++j) samples.push_back(f(flow.endpoint(pi, j)));
    double sum = 0.0;
    for (double v : samples) sum += v;
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) {
      out.value[pi] = *lo;
      continue;
    }
    const double mean = std::clamp(sum / n, *lo, *hi);
    out.value[pi] = mean;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    out.stderr_[pi] = std::sqrt(ss / (n * (n - 1.0)));
  }
  return out;
}

ScalarValues evaluate_scalar(const Transport& transport, const ScalarProbe& probe, double t,
                             std::uint64_t seed, const ScalarOptions& opts) {
  const FlowSample flow = backward_flow(transport, probe.points, probe.kappa_tilde, probe.mc_paths,
                                        t, seed, opts.threads);
  ScalarValues v = average_over_flow(flow, [&](const Vec& x) { return probe.initial(x); });
  if (opts.estimator_hook)
    for (double& x : v.value) x = opts.estimator_hook(x);
  return v;
}

MaxPrinciple max_principle_check(const ScalarValues& values, const ScalarProbe& probe) {
  MaxPrinciple r;
  r.margin = std::numeric_limits<double>::infinity();
  for (double v : values.value)
    r.margin = std::min({r.margin, v - probe.initial.inf(), probe.initial.sup() - v});
  if (values.value.empty()) r.margin = 0.0;
  r.pass = r.margin >= 0.0;
  return r;
}

EnergyReport energy_report(const ScalarValues& values, const BoxGrid& grid, const ScalarProbe& probe,
                           double tail_tolerance, double discretization_error) {
  const std::size_t n = grid.size();
  if (values.value.size() != n || values.stderr_.size() != n)
    throw ParameterError("energy_report: values do not match the grid");
  const int d = grid.dim();
  const double vol = grid.cell_volume();
  const double coarse_vol = vol * std::pow(2.0, d);
  EnergyReport r;
  r.t = values.t;
  r.positive_dissipation_expected = probe.kappa_tilde > 0.0;

  double l2 = 0.0, var = 0.0, init = 0.0, tail = 0.0;
  double coarse_l2 = 0.0, coarse_init = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values.value[i];
    const double se = values.stderr_[i];
    const Vec x = grid.point(i);
    const double t0 = probe.initial(x);
    const double sq = v * v - se * se;
    l2 += sq;
    init += t0 * t0;
    var += 4.0 * v * v * se * se;
    r.linf = std::max(r.linf, std::abs(v));
    std::size_t idx = i;
    bool even = true, outer = false;
    for (int k = 0; k < d; ++k) {
      const auto c = static_cast<std::size_t>(grid.counts[k]);
      const std::size_t j = idx % c;
      idx /= c;
      even = even && (j % 2 == 0);
      outer = outer || j == 0 || j + 1 == c;
    }
    if (even) {
      coarse_l2 += sq;
      coarse_init += t0 * t0;
    }
    if (outer) tail += v * v;
  }
  r.l2 = l2 * vol;
  r.initial_l2 = init * vol;
  r.l2_stderr = std::sqrt(var) * vol;
  r.dissipation = r.initial_l2 - r.l2;
  const double coarse_dissipation = (coarse_init - coarse_l2) * coarse_vol;
  const double quad = std::abs(r.dissipation - coarse_dissipation);
  r.discretization_error = std::abs(discretization_error);
  r.dissipation_stderr = std::hypot(std::hypot(r.l2_stderr, quad), r.discretization_error);
  const double total = std::max(l2, init);
  r.tail_fraction = total > 0.0 ? tail / total : 0.0;
  if (r.tail_fraction > tail_tolerance) {
    std::ostringstream os;
    os << "truncation tail " << r.tail_fraction << " exceeds " << tail_tolerance;
    r.warnings.push_back(os.str());
  }
  return r;
}

EnergyReport energy_with_step_doubling(const Transport& transport, const ScalarProbe& probe,
                                       const BoxGrid& grid, double t, std::uint64_t seed,
                                       unsigned threads, double tail_tolerance,
                                       ScalarValues* fine_values) {
  ScalarOptions opts;
  opts.threads = threads;
  const ScalarValues fine = evaluate_scalar(transport, probe, t, seed, opts);
  Transport coarse = transport;
  std::visit([](auto& tr) { tr.dt *= 2.0; }, coarse);
  if (auto* c = std::get_if<ColoredTransport>(&coarse)) c->c_dt *= 2.0;
  const ScalarValues rough = evaluate_scalar(coarse, probe, t, seed, opts);
  const EnergyReport rc = energy_report(rough, grid, probe, tail_tolerance);
  const EnergyReport rf = energy_report(fine, grid, probe, tail_tolerance);
  EnergyReport out = energy_report(fine, grid, probe, tail_tolerance, rf.dissipation - rc.dissipation);
  if (fine_values) *fine_values = fine;
  return out;
}

FunctionOfScalarReport function_of_scalar_check(const Transport& transport, const ScalarProbe& probe,
                                                const std::function<double(double)>& phi, double t,
                                                std::uint64_t seed, unsigned threads) {
  if (probe.kappa_tilde != 0.0) throw ParameterError("function_of_scalar_check: needs kappa~ = 0");
  const FlowSample flow = backward_flow(transport, probe.points, 0.0, 1, t, seed, threads);
  const ScalarValues base = average_over_flow(flow, [&](const Vec& x) { return probe.initial(x); });
  const ScalarValues composed = average_over_flow(flow, [&](const Vec& x) { return phi(probe.initial(x)); });
  FunctionOfScalarReport r;
  r.n_points = flow.n_points;
  for (std::size_t i = 0; i < flow.n_points; ++i)
    r.max_abs_difference = std::max(r.max_abs_difference, std::abs(phi(base.value[i]) - composed.value[i]));
  r.pass = r.max_abs_difference <= 1e-10;
  return r;
}

TwoSampleResult measure_preservation(const ScalarValues& values, const ScalarProbe& probe,
                                     std::uint64_t seed) {
  if (values.value.size() != probe.points.size())
    throw ParameterError("measure_preservation: values do not match the probe points");
  std::vector<double> initial;
  initial.reserve(probe.points.size());
  for (const Vec& x : probe.points) initial.push_back(probe.initial(x));
  return two_sample_match(values.value, initial, seed);
}

double heat_kernel_gaussian(const Profile& bump, const Vec& x, double kappa_tilde, double t) {
  if (bump.kind() != Profile::Kind::GaussianBump)
    throw ParameterError("heat_kernel_gaussian: needs a Gaussian bump");
  const double s2 = bump.width() * bump.width();
  const double v2 = s2 + kappa_tilde * t;
  const double r2 = (x - bump.center()).squaredNorm();
  return bump.amplitude() * std::pow(s2 / v2, 0.5 * x.size()) * std::exp(-0.5 * r2 / v2);
}

}  // namespace turbdisp
