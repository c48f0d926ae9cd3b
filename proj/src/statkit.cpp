#include "turbdisp/statkit.hpp"

#include "turbdisp/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace turbdisp {

namespace {

void check_series(const Series& s, const char* who) {
  if (s.t.size() != s.y.size() || (!s.se.empty() && s.se.size() != s.t.size()))
    throw FitError(std::string(who) + ": mismatched series lengths");
  for (std::size_t i = 1; i < s.t.size(); ++i)
    if (!(s.t[i] > s.t[i - 1])) throw FitError(std::string(who) + ": abscissa must increase");
}

// Linear interpolation of log y against log t.
double loglog_at(const Series& s, double lt) {
  auto it = std::lower_bound(s.t.begin(), s.t.end(), std::exp(lt));
  std::size_t i = static_cast<std::size_t>(it - s.t.begin());
  if (i == 0) i = 1;
  if (i >= s.t.size()) i = s.t.size() - 1;
  const double x0 = std::log(s.t[i - 1]), x1 = std::log(s.t[i]);
  const double y0 = std::log(s.y[i - 1]), y1 = std::log(s.y[i]);
  const double w = (lt - x0) / (x1 - x0);
  return y0 + w * (y1 - y0);
}

}  // namespace

PowerLawFit fit_power_law(const Series& s, Window w) {
  check_series(s, "fit_power_law");
  if (!(w.hi > w.lo)) throw FitError("fit_power_law: empty window");
  std::vector<double> x, y, wt;
  bool have_se = !s.se.empty();
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.t[i] < w.lo || s.t[i] > w.hi) continue;
    if (!(s.t[i] > 0.0) || !(s.y[i] > 0.0))
      throw FitError("fit_power_law: t and y must be positive in the window");
    x.push_back(std::log(s.t[i]));
    y.push_back(std::log(s.y[i]));
    if (have_se) {
      if (s.se[i] > 0.0) {
        const double rel = s.se[i] / s.y[i];
        wt.push_back(1.0 / (rel * rel));
      } else {
        have_se = false;
      }
    }
  }
  const std::size_t n = x.size();
  if (n < 8) throw FitError("fit_power_law: window holds " + std::to_string(n) + " points, need 8");
  if (!have_se) wt.assign(n, 1.0);

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += wt[i];
    sx += wt[i] * x[i];
    sy += wt[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += wt[i] * (x[i] - mx) * (x[i] - mx);
    sxy += wt[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit_power_law: degenerate abscissa");

  PowerLawFit f;
  f.exponent = sxy / sxx;
  const double icpt = my - f.exponent * mx;
  f.prefactor = std::exp(icpt);
  f.n_points = n;
  f.window = w;
  f.weighted = have_se;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (icpt + f.exponent * x[i]);
    chi2 += wt[i] * r * r;
    f.max_abs_log_residual = std::max(f.max_abs_log_residual, std::abs(r));
  }
  const double dof = static_cast<double>(n - 2);
  if (have_se) {
    f.reduced_chi2 = chi2 / dof;
    f.ci_half_width = 1.96 * std::sqrt(std::max(1.0, f.reduced_chi2) / sxx);
  } else {
    const boost::math::students_t dist(dof);
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    f.ci_half_width = tq * std::sqrt(chi2 / dof / sxx);
  }
  return f;
}

double curve_distance(const Series& a, const Series& b, Window w) {
  check_series(a, "curve_distance");
  check_series(b, "curve_distance");
  if (a.t.size() < 2 || b.t.size() < 2) throw FitError("curve_distance: need two points per curve");
  const double lo = std::max({w.lo, a.t.front(), b.t.front()});
  const double hi = std::min({w.hi, a.t.back(), b.t.back()});
  if (!(lo > 0.0) || !(hi > lo)) throw FitError("curve_distance: windows do not overlap");
  for (const Series* s : {&a, &b})
    for (double v : s->y)
      if (!(v > 0.0)) throw FitError("curve_distance: values must be positive");

  // Nodes: both grids inside the window plus the window edges. The squared
  // difference of two piecewise-linear functions is integrated exactly per
  // segment (Simpson on a quadratic).
  std::vector<double> nodes{std::log(lo), std::log(hi)};
  for (const Series* s : {&a, &b})
    for (double t : s->t)
      if (t > lo && t < hi) nodes.push_back(std::log(t));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double u0 = nodes[i], u1 = nodes[i + 1], um = 0.5 * (u0 + u1);
    const double d0 = loglog_at(a, u0) - loglog_at(b, u0);
    const double d1 = loglog_at(a, u1) - loglog_at(b, u1);
    const double dm = loglog_at(a, um) - loglog_at(b, um);
    acc += (u1 - u0) * (d0 * d0 + 4.0 * dm * dm + d1 * d1) / 6.0;
  }
  return std::sqrt(acc / (nodes.back() - nodes.front()));
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw FitError("ks_statistic: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

TwoSampleResult two_sample_match(std::span<const double> a, std::span<const double> b,
                                 std::uint64_t seed, int n_permutations) {
  if (n_permutations < 2) throw FitError("two_sample_match: need at least 2 permutations");
  TwoSampleResult r;
  r.statistic = ks_statistic(a, b);
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  RandomStream rng(seed, {static_cast<std::uint64_t>(StreamRole::Permutation)});
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n_permutations; ++k) {
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
      std::swap(pool[i], pool[std::min(j, i)]);
    }
    const double d = ks_statistic(std::span<const double>(pool.data(), a.size()),
                                  std::span<const double>(pool.data() + a.size(), b.size()));
    sum += d;
    sum2 += d * d;
  }
  const double n = n_permutations;
  r.null_mean = sum / n;
  r.null_sd = std::sqrt(std::max(0.0, (sum2 / n - r.null_mean * r.null_mean) * n / (n - 1.0)));
  r.threshold = r.null_mean + 3.0 * r.null_sd;
  r.pass = r.statistic <= r.threshold;
  return r;
}

ConvergenceTrace make_trace(std::vector<double> epsilons, std::vector<double> distances) {
  if (epsilons.size() != distances.size() || epsilons.empty())
    throw FitError("make_trace: need one distance per epsilon");
  for (std::size_t i = 1; i < epsilons.size(); ++i)
    if (!(epsilons[i] < epsilons[i - 1])) throw FitError("make_trace: epsilons must decrease");
  for (double d : distances)
    if (!std::isfinite(d)) throw FitError("make_trace: non-finite distance");
  ConvergenceTrace tr{std::move(epsilons), std::move(distances), true};
  for (std::size_t i = 1; i < tr.distances.size(); ++i)
    if (!(tr.distances[i] < tr.distances[i - 1])) tr.strictly_decreasing = false;
  return tr;
}

}  // namespace turbdisp
