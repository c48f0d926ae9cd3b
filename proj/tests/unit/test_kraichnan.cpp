#include <doctest.h>

#include "turbdisp/kraichnan.hpp"
#include "turbdisp/pairdisp.hpp"
#include "turbdisp/rng.hpp"

#include <cmath>
#include <limits>

using namespace turbdisp;

namespace {

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

double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

Mat random_rotation(int d, RandomStream& rng) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace

TEST_CASE("gamma1 vanishes when either argument is zero") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-3, 2);
  const KraichnanOracle o(p, 0.0);
  CHECK(o.gamma1(vec2(0, 0), vec2(0.3, 0.1)).norm() == 0.0);
  CHECK(o.gamma1(vec2(0.3, 0.1), vec2(0, 0)).norm() == 0.0);
  CHECK(o.b_bar(vec2(0, 0)).norm() == 0.0);
  CHECK(o.gamma1_closed(vec2(0, 0)).norm() == 0.0);
}

TEST_CASE("gamma1 quadrature matches the closed form") {
  for (int d : {2, 3}) {
    const auto p = make_params_direct(1.3, 0.4, 1.7, 1.0, 1.0, 1e-3, d);
    const KraichnanOracle o(p, 0.0);
    for (double r : {0.01, 0.3, 1.0}) {
      Vec x = d == 2 ? vec2(r * 0.6, r * 0.8) : vec3(r * 0.48, r * 0.6, r * 0.64);
      CHECK(rel_diff(o.gamma1(x, x), o.gamma1_closed(x)) < 1e-3);
      CHECK(rel_diff(o.b_bar(x), o.gamma1_closed(x)) < 1e-14);
    }
  }
}

TEST_CASE("gamma1 is symmetric under swapping its arguments") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-3, 3);
  const KraichnanOracle o(p, 0.0);
  const Vec x = vec3(0.2, -0.1, 0.05), y = vec3(-0.05, 0.3, 0.1);
  const Mat a = o.gamma1(x, y), b = o.gamma1(y, x);
  CHECK((a - b.transpose()).norm() < 1e-12 * a.norm());
  CHECK((o.gamma1_fast(x, y) - a).norm() < 1e-5 * a.norm());
}

TEST_CASE("closed form scaling, isotropy and trace") {
  RandomStream rng(3, {});
  for (int d : {2, 3}) {
    const auto p = make_params_direct(1.2, 0.45, 2.5, 1.0, 1.0, 1e-3, d);
    const KraichnanOracle o(p, 0.0);
    const double two_eta = 2.0 * o.eta();
    const double coef = p.e0 / c_alpha(p.alpha + p.beta, d);
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = rng.normal();
    const Mat g = o.gamma1_closed(x);
    for (double lam : {0.5, 2.0, 10.0})
      CHECK(rel_diff(o.gamma1_closed(lam * x), std::pow(lam, two_eta) * g) < 1e-12);
    for (int k = 0; k < 5; ++k) {
      const Mat rot = random_rotation(d, rng);
      CHECK(rel_diff(o.gamma1_closed(rot * x), rot * g * rot.transpose()) < 1e-12);
    }
    const double r = x.norm();
    const Vec xh = x / r;
    CHECK(xh.dot(g * xh) == doctest::Approx(coef * std::pow(r, two_eta)).epsilon(1e-13));
    CHECK(g.trace() == doctest::Approx(coef * std::pow(r, two_eta) * (d + two_eta)).epsilon(1e-13));
    Eigen::SelfAdjointEigenSolver<Mat> es(o.diffusion(x));
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("longitudinal diffusivity") {
  const auto p = make_params_direct(4.0 / 3.0, 1.0 / 3.0, 1.0, 2.0, 1.0, 1e-3, 3);
  const KraichnanOracle with_kappa(p, 0.4);
  CHECK(with_kappa.longitudinal_diffusivity(vec3(1e-12, 0, 0)) == doctest::Approx(0.2).epsilon(1e-12));
  const KraichnanOracle o(p, 0.0);
  CHECK(2.0 * o.eta() == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  const Vec x = vec3(0.3, 0.2, -0.1);
  CHECK(o.longitudinal_diffusivity(2.0 * x) / o.longitudinal_diffusivity(x) ==
        doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("finite-band table matches direct quadrature") {
  for (int d : {2, 3}) {
    const auto p = make_params_direct(1.05, 0.7, 1.0, 1.0, 1.0, 1e-3, d);
    const Band band{1e-2, 3.0};
    const KraichnanOracle o(p, 0.0, band);
    SpectralKernel kn = o.kernel();
    // Beyond r ~ L the parts oscillate about their plateau and the log-log
    // cubic resolves them less well.
    for (double r : {1e-4, 0.03, 0.77, 5.0, 60.0, 900.0, 1e6}) {
      const double tol = r < 100.0 ? 2e-5 : 3e-3;
      const IsotropicPair direct = structure_components(kn, r, 0.0, 1e-8);
      const IsotropicPair tab = o.parts(r);
      CHECK(tab.longitudinal == doctest::Approx(direct.longitudinal).epsilon(tol));
      CHECK(tab.transverse == doctest::Approx(direct.transverse).epsilon(tol));
    }
  }
}

TEST_CASE("gamma1 approaches the closed form as L grows") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-3, 2);
  const Vec x = vec2(0.5, 0.0);
  const double target = gamma1_closed(p, x)(0, 0);
  double prev = 0.0;
  for (double l : {1.0, 10.0, 100.0, 1000.0, 1e4}) {
    const KraichnanOracle o(p, 0.0, Band{1.0 / l, std::numeric_limits<double>::infinity()});
    const double v = o.gamma1(x, x)(0, 0);
    CHECK(v > prev);
    CHECK(v < target * (1.0 + 1e-6));
    prev = v;
  }
  CHECK(prev == doctest::Approx(target).epsilon(1e-2));
}

TEST_CASE("divergent or malformed oracles are rejected") {
  const auto p = make_params_direct(1.6, 0.5, 1.0, 1.0, 1.0, 1e-3, 2);
  CHECK_THROWS_AS(KraichnanOracle(p, 0.0), ParameterError);
  CHECK_NOTHROW(KraichnanOracle(p, 0.0, Band{0.1, 10.0}));
  CHECK_THROWS_AS(KraichnanOracle(p, -1.0, Band{0.1, 10.0}), ParameterError);
}

TEST_CASE("psd square root") {
  Eigen::MatrixXd m(3, 3);
  m << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Eigen::MatrixXd s = psd_sqrt(m);
  CHECK((s * s - m).norm() < 1e-12);
  Eigen::MatrixXd bad = -m;
  CHECK_THROWS_AS(psd_sqrt(bad), FactorizationError);
  CHECK(psd_sqrt(Eigen::MatrixXd::Zero(2, 2)).norm() == 0.0);
}

TEST_CASE("limit diffusion without a field is Brownian") {
  const auto p = make_params_direct(1.2, 0.45, 0.0, 1.0, 1.0, 1e-3, 2);
  const double kappa0 = 0.3;
  const KraichnanOracle o(p, kappa0);
  LimitSimOptions opt;
  opt.sample_times = uniform_time_grid(2.0, 20);
  const Vec x0 = vec2(1.0, 0.0);
  const auto ens = simulate_limit_pairs(o, x0, 4000, 5, opt);
  const auto m = msd(ens);
  CHECK(m.y[0] == 1.0);
  CHECK(m.se[0] == 0.0);
  for (std::size_t i = 1; i < m.t.size(); ++i)
    CHECK(std::abs(m.y[i] - (1.0 + 2.0 * kappa0 * m.t[i])) < 3.0 * m.se[i]);
}

TEST_CASE("limit ensembles do not depend on the worker count") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-3, 2);
  const KraichnanOracle o(p, 0.0);
  LimitSimOptions opt;
  opt.sample_times = log_time_grid(0.01, 1.0, 10);
  opt.threads = 1;
  const auto a = simulate_limit_pairs(o, vec2(1.0, 0.0), 64, 9, opt);
  opt.threads = 3;
  const auto b = simulate_limit_pairs(o, vec2(1.0, 0.0), 64, 9, opt);
  CHECK(a.data == b.data);
  CHECK(a.steps_taken == b.steps_taken);
}

TEST_CASE("limit msd grows with the dispersion exponent") {
  const auto p = make_params_direct(1.2, 0.45, c_alpha(1.65, 2), 1.0, 1.0, 1e-3, 2);
  const KraichnanOracle o(p, 0.0);
  LimitSimOptions opt;
  opt.sample_times = log_time_grid(1.0, 100.0, 40);
  const auto ens = simulate_limit_pairs(o, vec2(1.0, 0.0), 800, 21, opt);
  const auto fit = fit_power_law(msd(ens), {10.0, 100.0});
  CHECK(fit.exponent == doctest::Approx(1.0 / 0.35).epsilon(0.15));
}

TEST_CASE("two-point moments") {
  const auto p = make_params_direct(1.2, 0.45, 1.0, 1.0, 1.0, 1e-3, 2);
  const KraichnanOracle o(p, 0.0);
  const std::vector<std::pair<Vec, Vec>> pts{{vec2(1.0, 0.0), vec2(0.0, 1.0)},
                                             {vec2(0.5, 0.5), vec2(0.5, 0.5)}};
  auto one = [](const Vec&, const Vec&) { return 1.0; };
  auto gap = [](const Vec& a, const Vec& b) { return (a - b).norm(); };
  auto near = [](const Vec& a, const Vec& b) { return std::exp(-(a.squaredNorm() + b.squaredNorm())); };
  auto nearer = [](const Vec& a, const Vec& b) { return 0.5 * std::exp(-(a.squaredNorm() + b.squaredNorm())); };

  const auto t0 = two_point_moment(o, near, pts, 0.0, 16, 1);
  CHECK(t0.value[0] == near(pts[0].first, pts[0].second));
  const auto c = two_point_moment(o, one, pts, 0.5, 32, 1);
  CHECK(c.value[0] == 1.0);
  CHECK(c.value[1] == 1.0);
  CHECK(c.stderr_[0] == 0.0);
  const auto g = two_point_moment(o, gap, pts, 0.5, 32, 1);
  CHECK(g.value[0] > 0.0);
  CHECK(g.value[1] == 0.0);
  CHECK(two_point_moment(o, gap, pts, 0.0, 4, 1).value[1] == 0.0);
  const auto lo = two_point_moment(o, nearer, pts, 0.5, 32, 2);
  const auto hi = two_point_moment(o, near, pts, 0.5, 32, 2);
  CHECK(lo.value[0] <= hi.value[0]);
  CHECK(lo.value[1] <= hi.value[1]);

  const Eigen::MatrixXd dm = two_point_diffusion(o, vec2(0.3, 0.2), vec2(0.3, 0.2));
  Eigen::VectorXd diff(4);
  diff << 1, 0, -1, 0;
  CHECK(std::abs(diff.dot(dm * diff)) < 1e-14 * dm.trace());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(two_point_diffusion(o, vec2(0.3, 0.2), vec2(-0.1, 0.7)));
  CHECK(es.eigenvalues().minCoeff() >= -1e-12 * dm.trace());
}
