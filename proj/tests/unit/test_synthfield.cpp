#include <doctest.h>

#include "turbdisp/synthfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace turbdisp;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson over [a, b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Brute-force 2-D structure components on a dense (log k, phi) grid.
std::pair<double, double> dense_structure_2d(const SpectrumParams& p, double r, double tau) {
  const Band b = p.band();
  auto radial = [&](double u, bool longitudinal) {
    const double k = std::exp(u);
    auto ang = [&](double phi) {
      const double c = std::cos(phi), s = std::sin(phi);
      return 2.0 * (1.0 - std::cos(k * r * c)) * (longitudinal ? s * s : c * c);
    };
    const double a = simpson(ang, 0.0, 2.0 * kPi, 512);
    return k * std::pow(k, 1.0 - 2.0 * p.alpha) * std::exp(-p.a * std::pow(k, 2.0 * p.beta) * tau) * a;
  };
  const double lo = std::log(b.k_min), hi = std::log(b.k_max);
  const double pref = p.e0 / std::pow(2.0 * kPi, 2);
  const double l = pref * simpson([&](double u) { return radial(u, true); }, lo, hi, 6000);
  const double t = pref * simpson([&](double u) { return radial(u, false); }, lo, hi, 6000);
  return {l, t};
}

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  using B = Philox4x32::Block;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(B{0, 0, 0, 0}, K{0, 0}) ==
        B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             K{0xffffffffu, 0xffffffffu}) ==
        B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             K{0xa4093822u, 0x299f31d0u}) ==
        B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("random streams are keyed by seed and path") {
  RandomStream a(7, {1, 2}), b(7, {1, 2}), c(7, {1, 3}), d(8, {1, 2});
  const double xa = a.uniform();
  CHECK(xa == b.uniform());
  CHECK(xa != c.uniform());
  CHECK(xa != d.uniform());

  RandomStream s(11, {});
  double sum = 0.0, sum2 = 0.0, umin = 1.0, umax = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
    const double u = s.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
}

TEST_CASE("default layout splits modes into shells and directions") {
  auto l = default_layout(256, 2);
  CHECK(l.n_dirs == 16);
  CHECK(l.n_shells == 16);
  l = default_layout(256, 3);
  CHECK(l.n_dirs == 32);
  CHECK(l.n_shells == 8);
  l = default_layout(7, 3);
  CHECK(l.n_dirs == 1);
  CHECK(l.n_shells == 7);
  CHECK_THROWS_AS(default_layout(0, 2), ParameterError);
}

TEST_CASE("mode weights reproduce the band-integrated spectrum") {
  const auto p = make_params_direct(1.4, 0.3, 2.0, 1.0, 1.0, 1e-2, 3);
  RandomStream rng(3, {});
  const ModeSet ms = make_modes(p, p.band(), ModeLayout{10, 32, true}, rng);
  REQUIRE(ms.size() == 320u);
  // Total variance per transverse component: e0 * Omega_3 / (2pi)^3 * int k^(1-2alpha) dk.
  const double pw = 2.0 - 2.0 * p.alpha;
  const double radial = (std::pow(100.0, pw) - 1.0) / pw;
  const double expected = p.e0 * 4.0 * kPi * radial / std::pow(2.0 * kPi, 3);
  double total = 0.0;
  for (double v : ms.variance) total += v;
  CHECK(total == doctest::Approx(expected).epsilon(1e-12));
  for (std::size_t m = 0; m < ms.size(); ++m) {
    CHECK(p.band().contains(ms.magnitude(m)));
    CHECK(ms.rates[m] == doctest::Approx(p.a * std::pow(ms.magnitude(m), 2.0 * p.beta)));
  }
}

TEST_CASE("single mode increment matches the complex exponential") {
  const auto p = make_params_direct(1.3, 0.4, 1.0, 1.0, 1.0, 0.01, 2);
  const ModeSet ms = make_modes_explicit(p, p.band(), {vec2(3.0, 4.0)}, {1.0});
  SpectralField f(p, ms, RandomStream(5, {}));
  const Vec ar = f.amplitude_real(0), ai = f.amplitude_imag(0);
  const Vec k = vec2(3.0, 4.0);
  for (double s : {0.0, 0.1, 0.37, 2.5}) {
    const Vec x = vec2(s, -0.5 * s);
    const double th = k.dot(x);
    const Vec direct = ar * (std::cos(th) - 1.0) - ai * std::sin(th);
    CHECK((f.eval_increment(x) - direct).norm() < 1e-14);
  }
  CHECK(f.eval_increment(vec2(0.0, 0.0)).norm() == 0.0);
}

TEST_CASE("synthesized fields are divergence-free and reproducible") {
  const auto p = make_params_direct(4.0 / 3.0, 1.0 / 3.0, 1.0, 1.0, 1.0, 1e-3, 3);
  SpectralField f = synthesize(p, 256, 42);
  CHECK(f.incompressibility_residual() < 1e-12);
  SpectralField g = synthesize(p, 256, 42);
  const Vec x = vec3(0.1, -0.2, 0.05);
  CHECK(f.eval_increment(x) == g.eval_increment(x));
  f.advance(0.01);
  g.advance(0.01);
  CHECK(f.eval_increment(x) == g.eval_increment(x));
  CHECK(f.incompressibility_residual() < 1e-12);

  SynthesisOptions o;
  o.realization = 1;
  SpectralField h = synthesize(p, 256, 42, o);
  CHECK(h.eval_increment(x) != g.eval_increment(x));
}

TEST_CASE("jitter-free layouts place modes identically") {
  const auto p = make_params_direct(1.5, 0.5, 1.0, 1.0, 1.0, 1e-2, 2);
  SynthesisOptions o;
  o.layout = ModeLayout{8, 8, false};
  const auto a = synthesize(p, 64, 1, o).modes().wavevectors;
  o.realization = 9;
  const auto b = synthesize(p, 64, 1, o).modes().wavevectors;
  CHECK(a == b);
}

TEST_CASE("ou steps") {
  const OuStep zero = ou_step(2.0, 0.0);
  CHECK(zero.decay == 1.0);
  CHECK(zero.injected == 0.0);
  const OuStep inf = ou_step(2.0, 1e6);
  CHECK(inf.decay == 0.0);
  CHECK(inf.injected == 1.0);
  for (double r : {0.1, 1.0, 30.0}) {
    const OuStep ab = compose(ou_step(r, 0.013), ou_step(r, 0.29));
    const OuStep direct = ou_step(r, 0.303);
    CHECK(ab.decay == doctest::Approx(direct.decay).epsilon(1e-14));
    CHECK(ab.injected == doctest::Approx(direct.injected).epsilon(1e-14));
  }
  const auto p = make_params_direct(1.5, 0.5, 1.0, 1.0, 1.0, 1e-2, 2);
  SpectralField f = synthesize(p, 32, 3);
  const std::vector<double> before(f.raw_amplitudes().begin(), f.raw_amplitudes().end());
  f.advance(0.0);
  CHECK(std::equal(before.begin(), before.end(), f.raw_amplitudes().begin()));
  CHECK(f.time() == 0.0);
  CHECK_THROWS_AS(f.advance(-1e-3), ParameterError);
}

TEST_CASE("ou amplitudes decorrelate at their rate") {
  const auto p = make_params_direct(1.5, 0.5, 1.0, 1.0, 1.0, 0.25, 2);
  const ModeSet ms = make_modes_explicit(p, p.band(), {vec2(2.0, 0.0)}, {1.0});
  const double rate = ms.rates[0];
  const double var = ms.variance[0];
  const double tau = 0.3 / rate;
  double c0 = 0.0, c1 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    SpectralField f(p, ms, RandomStream(17, {static_cast<std::uint64_t>(i)}));
    const double x0 = f.raw_amplitudes()[0];
    f.advance(tau);
    const double x1 = f.raw_amplitudes()[0];
    c0 += x0 * x0;
    c1 += x0 * x1;
  }
  CHECK(c0 / n == doctest::Approx(var).epsilon(5.0 * std::sqrt(2.0 / n)));
  CHECK(c1 / c0 == doctest::Approx(std::exp(-rate * tau)).epsilon(0.02));
}

TEST_CASE("structure function quadrature matches a dense grid") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 0.01, 2);
  for (double r : {0.05, 0.3}) {
    for (double tau : {0.0, 0.1}) {
      const Mat s = structure_function_exact(p, vec2(r, 0.0), tau);
      const auto [l, t] = dense_structure_2d(p, r, tau);
      CHECK(s(0, 0) == doctest::Approx(l).epsilon(1e-5));
      CHECK(s(1, 1) == doctest::Approx(t).epsilon(1e-5));
      CHECK(std::abs(s(0, 1)) < 1e-14 * s(0, 0));
    }
  }
}

TEST_CASE("structure function properties") {
  const auto p = make_params_direct(1.4, 0.35, 1.0, 1.0, 1.0, 1e-3, 3);
  CHECK(structure_function_exact(p, vec3(0, 0, 0), 0.0).norm() == 0.0);
  const Vec r = vec3(0.02, -0.01, 0.03);
  const Mat s0 = structure_function_exact(p, r, 0.0);
  CHECK((s0 - s0.transpose()).norm() < 1e-15 * s0.norm());
  Eigen::SelfAdjointEigenSolver<Mat> es(s0);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  // Rotation covariance: the tensor depends on r only through |r| and r^.
  const Mat s1 = structure_function_exact(p, -r, 0.0);
  CHECK((s0 - s1).norm() < 1e-12 * s0.norm());
  // Time lag only removes correlation.
  double prev = s0.trace();
  for (double tau : {0.01, 0.1, 1.0}) {
    const double tr = structure_function_exact(p, r, tau).trace();
    CHECK(tr < prev);
    prev = tr;
  }
  // Unbounded band: power law in |r| with exponent 2 alpha - 2.
  const Band open{0.0, std::numeric_limits<double>::infinity()};
  const double a1 = structure_function_exact(p, vec3(0.1, 0, 0), 0.0, open)(0, 0);
  const double a2 = structure_function_exact(p, vec3(0.2, 0, 0), 0.0, open)(0, 0);
  CHECK(std::log2(a2 / a1) == doctest::Approx(2.0 * p.alpha - 2.0).epsilon(1e-7));
  CHECK(a1 == doctest::Approx(p.e0 * std::pow(0.1, 2.0 * p.alpha - 2.0) / c_alpha(p.alpha, 3))
                  .epsilon(1e-7));
}

TEST_CASE("ensemble covariance matches the band-limited target") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 0.01, 2);
  const Vec r = vec2(0.12, 0.05);
  for (double tau : {0.0, 0.05}) {
    const TensorEstimate est = structure_function_estimate(p, 64, r, tau, 3000, 99);
    const Mat exact = structure_function_exact(p, r, tau);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(std::abs(est.mean(i, j) - exact(i, j)) < 5.0 * est.stderr_(i, j));
  }
}

TEST_CASE("standard error shrinks as one over root n") {
  const auto p = make_params_direct(1.5, 0.5, 1.0, 1.0, 1.0, 0.02, 3);
  const Vec r = vec3(0.1, 0.0, 0.0);
  const auto small = structure_function_estimate(p, 32, r, 0.0, 500, 4);
  const auto large = structure_function_estimate(p, 32, r, 0.0, 2000, 4);
  CHECK(large.stderr_(0, 0) / small.stderr_(0, 0) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("invalid synthesis inputs are rejected") {
  const auto p = make_params_direct(1.5, 0.5, 1.0, 1.0, 1.0, 0.02, 3);
  CHECK_THROWS_AS(synthesize(p, 0, 1), ParameterError);
  SynthesisOptions o;
  o.band = Band{0.0, 10.0};
  CHECK_THROWS_AS(synthesize(p, 32, 1, o), ParameterError);
  CHECK_THROWS_AS(make_modes_explicit(p, p.band(), {vec3(1000, 0, 0)}, {1.0}), ParameterError);
  CHECK_THROWS_AS(structure_function_exact(p, vec2(1, 0), 0.0), ParameterError);
}
