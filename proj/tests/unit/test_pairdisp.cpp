#include <doctest.h>

#include "turbdisp/pairdisp.hpp"

#include <cmath>

using namespace turbdisp;

namespace {

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

PairSimOptions small_run(double t_end, std::size_t n, double dt) {
  PairSimOptions o;
  o.sample_times = uniform_time_grid(t_end, n);
  o.dt = dt;
  o.n_modes = 32;
  return o;
}

}  // namespace

TEST_CASE("rescaling exponents") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-2, 2);
  const Band band{0.5, 50.0};
  for (double eps : {1.0, 0.3, 0.01}) {
    const auto wn = RescaleSpec::white_noise(p, eps, 0.1, band);
    CHECK(wn.q == doctest::Approx(0.35));
    CHECK(wn.drift_prefactor(p) * wn.drift_prefactor(p) == doctest::Approx(wn.time_speed(p)).epsilon(1e-13));
    CHECK(wn.small_parameter(p) == doctest::Approx(std::pow(eps, 0.45 - 0.35)).epsilon(1e-14));
    CHECK(wn.molecular_kappa() == doctest::Approx(0.1 * std::pow(eps, 1.3)).epsilon(1e-14));
    const auto fr = RescaleSpec::frozen(p, eps, 0.0, band);
    CHECK(fr.q == doctest::Approx(0.4));
    CHECK(fr.drift_prefactor(p) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(RescaleSpec::white_noise(p, 0.01, 0.0, band).small_parameter(p) < 1.0);
  CHECK(stable_dt(p, band, 4.0, 0.1) == doctest::Approx(0.1 / (4.0 * std::pow(50.0, 0.9))));
}

TEST_CASE("no field and no noise leaves pairs in place") {
  const auto p = make_params_direct(1.2, 0.45, 0.0, 1.0, 1.0, 1e-2, 2);
  const auto ens = simulate_pairs(p, vec2(0.3, -0.2), 0.0, 5, 1, small_run(1.0, 10, 0.1));
  for (std::size_t pi = 0; pi < 5; ++pi)
    for (std::size_t ti = 0; ti < ens.n_times(); ++ti) {
      CHECK(ens.at(pi, ti)[0] == 0.3);
      CHECK(ens.at(pi, ti)[1] == -0.2);
    }
  CHECK(ens.steps_taken == 50);
}

TEST_CASE("no field gives Brownian separation") {
  const auto p = make_params_direct(1.2, 0.45, 0.0, 1.0, 1.0, 1e-2, 2);
  const double kappa = 0.2;
  const auto ens = simulate_pairs(p, vec2(1.0, 0.0), kappa, 4000, 3, small_run(2.0, 8, 0.01));
  const auto m = msd(ens);
  CHECK(m.y[0] == 1.0);
  CHECK(m.se[0] == 0.0);
  for (std::size_t i = 1; i < m.t.size(); ++i)
    CHECK(std::abs(m.y[i] - (1.0 + 2.0 * kappa * m.t[i])) < 3.0 * m.se[i]);
}

TEST_CASE("too large a step is rejected with the bound") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-2, 2);
  const double bound = stable_dt(p, p.band(), 1.0, 0.1);
  try {
    simulate_pairs(p, vec2(0.1, 0.0), 0.0, 1, 1, small_run(1.0, 4, 2.0 * bound));
    FAIL("expected a StabilityError");
  } catch (const StabilityError& e) {
    CHECK(e.max_dt() == doctest::Approx(bound));
  }
  CHECK_NOTHROW(simulate_pairs(p, vec2(0.1, 0.0), 0.0, 1, 1, small_run(0.01, 4, bound)));
}

TEST_CASE("invalid simulation requests") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-2, 2);
  auto o = small_run(1.0, 4, 1e-3);
  CHECK_THROWS_AS(simulate_pairs(p, vec2(0.1, 0.0), -1.0, 1, 1, o), ParameterError);
  CHECK_THROWS_AS(simulate_pairs(p, vec2(0.1, 0.0), 0.0, 0, 1, o), ParameterError);
  Vec bad(3);
  bad << 1, 0, 0;
  CHECK_THROWS_AS(simulate_pairs(p, bad, 0.0, 1, 1, o), ParameterError);
  o.sample_times = {0.5, 1.0};
  CHECK_THROWS_AS(simulate_pairs(p, vec2(0.1, 0.0), 0.0, 1, 1, o), ParameterError);
  const auto rs = RescaleSpec::white_noise(p, 0.5, 0.0, Band{1.0, std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(simulate_rescaled(p, rs, vec2(0.1, 0.0), 1, 1, small_run(1.0, 4, 1e-3)), ParameterError);
}

TEST_CASE("unit epsilon reproduces the unscaled dynamics") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-2, 2);
  auto o = small_run(0.5, 10, 1e-3);
  o.record_drift = true;
  const auto a = simulate_pairs(p, vec2(0.2, 0.1), 0.05, 6, 11, o);
  const auto rs = RescaleSpec::white_noise(p, 1.0, 0.05, p.band());
  const auto b = simulate_rescaled(p, rs, vec2(0.2, 0.1), 6, 11, o);
  CHECK(a.data == b.data);
  CHECK(a.drift == b.drift);
}

TEST_CASE("ensembles do not depend on the worker count") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-2, 2);
  auto o = small_run(0.2, 5, 1e-3);
  o.random_direction = true;
  o.threads = 1;
  const auto a = simulate_pairs(p, vec2(0.2, 0.0), 0.01, 12, 5, o);
  o.threads = 3;
  const auto b = simulate_pairs(p, vec2(0.2, 0.0), 0.01, 12, 5, o);
  CHECK(a.data == b.data);
  CHECK(a.steps_taken == b.steps_taken);
  for (std::size_t pi = 0; pi < 12; ++pi)
    CHECK(a.position(pi, 0).norm() == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("halving the step leaves the msd within statistical error") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-2, 2);
  const auto coarse = msd(simulate_pairs(p, vec2(0.1, 0.0), 0.0, 300, 17, small_run(0.5, 5, 1.5e-3)));
  const auto fine = msd(simulate_pairs(p, vec2(0.1, 0.0), 0.0, 300, 17, small_run(0.5, 5, 0.75e-3)));
  for (std::size_t i = 1; i < coarse.t.size(); ++i) {
    const double se = std::hypot(coarse.se[i], fine.se[i]);
    CHECK(std::abs(coarse.y[i] - fine.y[i]) < 4.0 * se);
  }
  CHECK(fine.y.back() > fine.y.front());
}

TEST_CASE("relative diffusivity of Brownian separation is flat") {
  const auto p = make_params_direct(1.2, 0.45, 0.0, 1.0, 1.0, 1e-2, 2);
  const double kappa = 0.5;
  PairSimOptions o;
  o.sample_times = uniform_time_grid(4.0, 400);
  o.dt = 0.01;
  const auto ens = simulate_pairs(p, vec2(1.0, 0.0), kappa, 2000, 23, o);
  const auto bins = relative_diffusivity(ens, {0.5, 1.0, 2.0, 4.0, 100.0, 200.0});
  for (std::size_t b = 0; b < 3; ++b) {
    REQUIRE_FALSE(bins[b].missing);
    CHECK(std::abs(bins[b].value - 0.5 * kappa) < 4.0 * bins[b].stderr_ + 0.02 * kappa);
    CHECK(bins[b].r_center == doctest::Approx(std::sqrt(bins[b].r_lo * bins[b].r_hi)));
  }
  CHECK(bins[4].missing);
  CHECK(bins[4].samples == 0);
  CHECK(diffusivity_series(bins).t.size() < bins.size());
  CHECK_THROWS_AS(relative_diffusivity(ens, {1.0}), ParameterError);
  CHECK_THROWS_AS(relative_diffusivity(ens, {2.0, 1.0}), ParameterError);
}

TEST_CASE("frozen-class drift decorrelates on the rescaled time") {
  // With negligible e0 the pairs stay put and the field evolves at speed
  // eps^(2(q - beta)); sampling at times scaled by that speed replays the
  // same amplitudes.
  const auto p = make_params_direct(1.5, 0.1, 1e-12, 1.0, 1.0, 1e-2, 2);
  const Band band{1.0, 20.0};
  const auto hi = RescaleSpec::frozen(p, 0.5, 0.0, band);
  const auto lo = RescaleSpec::frozen(p, 0.25, 0.0, band);
  const double ratio = hi.time_speed(p) / lo.time_speed(p);
  CHECK(ratio == doctest::Approx(std::pow(2.0, 2.0 * (hi.q - p.beta))).epsilon(1e-13));
  CHECK(ratio > 1.0);

  PairSimOptions o;
  o.n_modes = 32;
  o.record_drift = true;
  o.dt = 0.05;
  o.sample_times = uniform_time_grid(4.0, 8);
  const auto a = simulate_rescaled(p, hi, vec2(0.3, 0.0), 50, 31, o);
  o.dt *= ratio;
  for (double& t : o.sample_times) t *= ratio;
  const auto b = simulate_rescaled(p, lo, vec2(0.3, 0.0), 50, 31, o);
  const Series ca = drift_autocorrelation(a, 0);
  const Series cb = drift_autocorrelation(b, 0);
  REQUIRE(ca.y.size() == cb.y.size());
  CHECK(ca.y[0] == doctest::Approx(1.0));
  for (std::size_t i = 0; i < ca.y.size(); ++i) {
    CHECK(cb.y[i] == doctest::Approx(ca.y[i]).epsilon(1e-6));
    CHECK(cb.t[i] == doctest::Approx(ratio * ca.t[i]));
  }
  CHECK(ca.y.back() < 0.9);
  CHECK_THROWS_AS(drift_autocorrelation(simulate_rescaled(p, hi, vec2(0.3, 0.0), 2, 1, small_run(0.1, 2, 0.05)), 0),
                  ParameterError);
}
