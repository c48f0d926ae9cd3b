#include "turbdisp/synthfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace turbdisp {

namespace {

constexpr double kPi = std::numbers::pi;

double solid_angle(int dim) { return dim == 2 ? 2.0 * kPi : 4.0 * kPi; }

void check_band(Band band) {
  if (!(band.k_min > 0.0) || !std::isfinite(band.k_max) || !(band.k_max > band.k_min))
    throw ParameterError("empty band: need 0 < k_min < k_max < inf (got " +
                         std::to_string(band.k_min) + ", " + std::to_string(band.k_max) + ")");
}

// Orthonormal vectors spanning the plane transverse to unit vector kh.
void transverse_basis(const Vec& kh, std::vector<double>& out) {
  if (kh.size() == 2) {
    out.push_back(-kh(1));
    out.push_back(kh(0));
    return;
  }
  Eigen::Vector3d k3(kh(0), kh(1), kh(2));
  Eigen::Index axis = 0;
  k3.cwiseAbs().minCoeff(&axis);
  Eigen::Vector3d helper = Eigen::Vector3d::Zero();
  helper(axis) = 1.0;
  Eigen::Vector3d e1 = k3.cross(helper).normalized();
  Eigen::Vector3d e2 = k3.cross(e1).normalized();
  // One Gram-Schmidt pass against kh keeps k.e at rounding level.
  e1 -= e1.dot(k3) * k3;
  e1.normalize();
  e2 -= e2.dot(k3) * k3 + e2.dot(e1) * e1;
  e2.normalize();
  for (int i = 0; i < 3; ++i) out.push_back(e1(i));
  for (int i = 0; i < 3; ++i) out.push_back(e2(i));
}

// Spherical Fibonacci directions; the first lies on the x axis when n = 1.
std::vector<Eigen::Vector3d> fibonacci_directions(int n) {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    dirs.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  // Put (rho, 0, z) convention onto x for the single-direction case.
  if (n == 1) dirs[0] = Eigen::Vector3d(1.0, 0.0, 0.0);
  return dirs;
}

Eigen::Matrix3d haar_rotation(RandomStream& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

ModeLayout default_layout(int n_modes, int dim) {
  if (n_modes < 1) throw ParameterError("n_modes must be at least 1");
  const int dirs = std::gcd(n_modes, dim == 2 ? 16 : 32);
  return ModeLayout{n_modes / dirs, dirs, true};
}

Vec ModeSet::wavevector(std::size_t m) const {
  Vec k(dim);
  for (int i = 0; i < dim; ++i) k(i) = wavevectors[m * dim + i];
  return k;
}

ModeSet make_modes(const SpectrumParams& p, Band band, const ModeLayout& layout,
                   RandomStream& rng) {
  validate(p);
  check_band(band);
  if (layout.n_shells < 1 || layout.n_dirs < 1)
    throw ParameterError("mode layout needs at least one shell and one direction");

  ModeSet ms;
  ms.dim = p.dim;
  ms.band = band;
  const std::size_t n = static_cast<std::size_t>(layout.n_shells) * layout.n_dirs;
  ms.wavevectors.reserve(n * p.dim);
  ms.basis.reserve(n * (p.dim - 1) * p.dim);
  ms.variance.reserve(n);
  ms.weights.reserve(n);
  ms.rates.reserve(n);

  const double expo = 1.0 - 2.0 * p.alpha;  // radial density k^(1-2alpha)
  const double pw = expo + 1.0;             // nonzero since alpha > 1
  const double cell_angle = solid_angle(p.dim) / layout.n_dirs;
  const double norm = std::pow(2.0 * kPi, p.dim);
  const double ratio = band.k_max / band.k_min;
  const auto dirs3 = p.dim == 3 ? fibonacci_directions(layout.n_dirs)
                                : std::vector<Eigen::Vector3d>{};

  for (int s = 0; s < layout.n_shells; ++s) {
    const double lo = band.k_min * std::pow(ratio, static_cast<double>(s) / layout.n_shells);
    const double hi = band.k_min * std::pow(ratio, static_cast<double>(s + 1) / layout.n_shells);
    const double lo_p = std::pow(lo, pw);
    const double hi_p = std::pow(hi, pw);
    const double radial = (hi_p - lo_p) / pw;
    const double cell_weight = radial * cell_angle / norm;

    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    double offset2 = 0.0;
    if (layout.jitter) {
      if (p.dim == 3) {
        rot = haar_rotation(rng);
      } else {
        offset2 = rng.uniform();
      }
    }

    for (int j = 0; j < layout.n_dirs; ++j) {
      double kmag;
      if (layout.jitter) {
        // Inverse CDF of the density k^(1-2alpha) inside the shell.
        const double u = rng.uniform();
        kmag = std::pow(lo_p + u * (hi_p - lo_p), 1.0 / pw);
      } else {
        kmag = std::sqrt(lo * hi);
      }
      Vec kh(p.dim);
      if (p.dim == 2) {
        const double th = kPi * (j + (layout.jitter ? offset2 : 0.0)) / layout.n_dirs;
        kh << std::cos(th), std::sin(th);
      } else {
        const Eigen::Vector3d d = rot * dirs3[j];
        kh << d(0), d(1), d(2);
        kh.normalize();
      }
      for (int i = 0; i < p.dim; ++i) ms.wavevectors.push_back(kmag * kh(i));
      transverse_basis(kh, ms.basis);
      const double density = std::pow(kmag, expo);
      ms.weights.push_back(cell_weight / density);
      ms.variance.push_back(p.e0 * cell_weight);
      ms.rates.push_back(p.a * std::pow(kmag, 2.0 * p.beta));
    }
  }
  return ms;
}

ModeSet make_modes_explicit(const SpectrumParams& p, Band band,
                            const std::vector<Vec>& wavevectors,
                            const std::vector<double>& weights) {
  validate(p);
  check_band(band);
  if (wavevectors.empty() || wavevectors.size() != weights.size())
    throw ParameterError("explicit modes need matching non-empty wavevector and weight lists");
  ModeSet ms;
  ms.dim = p.dim;
  ms.band = band;
  for (std::size_t m = 0; m < wavevectors.size(); ++m) {
    const Vec& k = wavevectors[m];
    if (k.size() != p.dim) throw ParameterError("explicit mode has wrong dimension");
    const double kmag = k.norm();
    if (!band.contains(kmag)) throw ParameterError("explicit mode lies outside the band");
    if (!(weights[m] > 0.0)) throw ParameterError("explicit mode weight must be positive");
    for (int i = 0; i < p.dim; ++i) ms.wavevectors.push_back(k(i));
    transverse_basis(k / kmag, ms.basis);
    ms.weights.push_back(weights[m]);
    ms.variance.push_back(weights[m] * p.e0 * std::pow(kmag, 1.0 - 2.0 * p.alpha));
    ms.rates.push_back(p.a * std::pow(kmag, 2.0 * p.beta));
  }
  return ms;
}

OuStep ou_step(double rate, double dt) {
  const double f = std::exp(-rate * dt);
  return {f, -std::expm1(-2.0 * rate * dt)};
}

OuStep compose(const OuStep& first, const OuStep& second) {
  // x2 = f2 (f1 x0 + s1) + s2: variance fraction f2^2 (1 - f1^2) + (1 - f2^2).
  return {first.decay * second.decay,
          second.decay * second.decay * first.injected + second.injected};
}

SpectralField::SpectralField(SpectrumParams params, ModeSet modes, RandomStream rng)
    : params_(params), modes_(std::move(modes)), rng_(rng) {
  const std::size_t per = 2 * static_cast<std::size_t>(modes_.dim - 1);
  amp_.resize(modes_.size() * per);
  noise_.resize(amp_.size());
  rng_.fill_normal(amp_);
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const double sd = std::sqrt(modes_.variance[m]);
    for (std::size_t j = 0; j < per; ++j) amp_[m * per + j] *= sd;
  }
}

void SpectralField::refresh_coefficients(double dt) {
  decay_.resize(modes_.size());
  kick_.resize(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const OuStep st = ou_step(modes_.rates[m], dt);
    decay_[m] = st.decay;
    kick_[m] = std::sqrt(modes_.variance[m] * st.injected);
  }
  cached_dt_ = dt;
}

void SpectralField::advance(double dt) {
  if (!(dt >= 0.0)) throw ParameterError("advance: dt must be non-negative");
  if (dt == 0.0) return;
  if (dt != cached_dt_) refresh_coefficients(dt);
  const std::size_t per = 2 * static_cast<std::size_t>(modes_.dim - 1);
  rng_.fill_normal(noise_);
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const double f = decay_[m];
    const double s = kick_[m];
    double* a = &amp_[m * per];
    const double* z = &noise_[m * per];
    for (std::size_t j = 0; j < per; ++j) a[j] = f * a[j] + s * z[j];
  }
  time_ += dt;
}

void SpectralField::eval_increment(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = modes_.size();
  const double* kv = modes_.wavevectors.data();
  const double* e = modes_.basis.data();
  const double* a = amp_.data();
  if (modes_.dim == 2) {
    double ux = 0.0, uy = 0.0;
    const double x0 = x[0], x1 = x[1];
    for (std::size_t m = 0; m < n; ++m) {
      const double half = 0.5 * (kv[2 * m] * x0 + kv[2 * m + 1] * x1);
      const double sh = std::sin(half);
      const double ch = std::cos(half);
      // cos(th) - 1 = -2 sin^2(th/2), sin(th) = 2 sin(th/2) cos(th/2)
      const double coef = -2.0 * sh * (a[2 * m] * sh + a[2 * m + 1] * ch);
      ux += coef * e[2 * m];
      uy += coef * e[2 * m + 1];
    }
    out[0] = ux;
    out[1] = uy;
    return;
  }
  double ux = 0.0, uy = 0.0, uz = 0.0;
  const double x0 = x[0], x1 = x[1], x2 = x[2];
  for (std::size_t m = 0; m < n; ++m) {
    const double* k = kv + 3 * m;
    const double half = 0.5 * (k[0] * x0 + k[1] * x1 + k[2] * x2);
    const double sh = std::sin(half);
    const double ch = std::cos(half);
    const double* am = a + 4 * m;  // b1, b2, c1, c2
    const double c1 = -2.0 * sh * (am[0] * sh + am[2] * ch);
    const double c2 = -2.0 * sh * (am[1] * sh + am[3] * ch);
    const double* em = e + 6 * m;
    ux += c1 * em[0] + c2 * em[3];
    uy += c1 * em[1] + c2 * em[4];
    uz += c1 * em[2] + c2 * em[5];
  }
  out[0] = ux;
  out[1] = uy;
  out[2] = uz;
}

Vec SpectralField::eval_increment(const Vec& x) const {
  if (x.size() != modes_.dim) throw ParameterError("eval_increment: dimension mismatch");
  Vec out(modes_.dim);
  eval_increment(std::span<const double>(x.data(), x.size()),
                 std::span<double>(out.data(), out.size()));
  return out;
}

namespace {

Vec combine(const ModeSet& ms, std::span<const double> amp, std::size_t m, bool imag) {
  const int d = ms.dim;
  const std::size_t per = 2 * static_cast<std::size_t>(d - 1);
  Vec v = Vec::Zero(d);
  for (int j = 0; j < d - 1; ++j) {
    const double c = amp[m * per + (imag ? d - 1 : 0) + j];
    for (int i = 0; i < d; ++i) v(i) += c * ms.basis[(m * (d - 1) + j) * d + i];
  }
  return v;
}

}  // namespace

Vec SpectralField::amplitude_real(std::size_t m) const { return combine(modes_, amp_, m, false); }
Vec SpectralField::amplitude_imag(std::size_t m) const { return combine(modes_, amp_, m, true); }

double SpectralField::incompressibility_residual() const {
  double worst = 0.0;
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const Vec k = modes_.wavevector(m);
    for (bool imag : {false, true}) {
      const Vec a = imag ? amplitude_imag(m) : amplitude_real(m);
      const double denom = k.norm() * a.norm();
      if (denom > 0.0) worst = std::max(worst, std::abs(k.dot(a)) / denom);
    }
  }
  return worst;
}

SpectralField synthesize(const SpectrumParams& p, int n_modes, std::uint64_t seed,
                         const SynthesisOptions& opts) {
  validate(p);
  const Band band = opts.band.value_or(p.band());
  const ModeLayout layout = opts.layout.value_or(default_layout(n_modes, p.dim));
  if (layout.n_shells * layout.n_dirs != n_modes && !opts.layout)
    throw ParameterError("layout does not match n_modes");
  RandomStream placement(seed, {static_cast<std::uint64_t>(StreamRole::Placement), opts.realization});
  ModeSet modes = make_modes(p, band, layout, placement);
  return SpectralField(p, std::move(modes),
                       RandomStream(seed, {static_cast<std::uint64_t>(StreamRole::Field), opts.realization}));
}

Mat structure_function_exact(const SpectrumParams& p, const Vec& r, double tau,
                             std::optional<Band> band) {
  validate(p);
  if (r.size() != p.dim) throw ParameterError("structure_function_exact: dimension mismatch");
  const Band b = band.value_or(p.band());
  if (!(b.k_max > b.k_min) || !(b.k_min >= 0.0))
    throw ParameterError("structure_function_exact: empty band");
  SpectralKernel kn{p.alpha, p.e0, p.a, p.beta, p.dim, b};
  return assemble_isotropic(r, structure_components(kn, r.norm(), tau, 1e-6));
}

TensorEstimate structure_function_estimate(const SpectrumParams& p, int n_modes,
                                           const Vec& r, double tau,
                                           std::size_t n_samples, std::uint64_t seed,
                                           const SynthesisOptions& opts) {
  if (n_samples < 2) throw ParameterError("structure_function_estimate: need n_samples >= 2");
  if (!(tau >= 0.0)) throw ParameterError("structure_function_estimate: tau must be >= 0");
  const int d = p.dim;
  Mat sum = Mat::Zero(d, d);
  Mat sum2 = Mat::Zero(d, d);
  for (std::size_t i = 0; i < n_samples; ++i) {
    SynthesisOptions o = opts;
    o.realization = opts.realization + i;
    SpectralField f = synthesize(p, n_modes, seed, o);
    const Vec u1 = f.eval_increment(r);
    f.advance(tau);
    const Vec u2 = f.eval_increment(r);
    const Mat prod = 0.5 * (u1 * u2.transpose() + u2 * u1.transpose());
    sum += prod;
    sum2 += prod.cwiseProduct(prod);
  }
  const double n = static_cast<double>(n_samples);
  TensorEstimate est;
  est.n_samples = n_samples;
  est.mean = sum / n;
  const Mat var = (sum2 / n - est.mean.cwiseProduct(est.mean)) * (n / (n - 1.0));
  est.stderr_ = (var.cwiseMax(0.0) / n).cwiseSqrt();
  return est;
}

}  // namespace turbdisp
