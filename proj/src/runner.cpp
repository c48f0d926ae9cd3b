#include "turbdisp/runner.hpp"

#include "turbdisp/io.hpp"
#include "turbdisp/kraichnan.hpp"
#include "turbdisp/pairdisp.hpp"
#include "turbdisp/rng.hpp"
#include "turbdisp/scalar.hpp"
#include "turbdisp/statkit.hpp"
#include "turbdisp/synthfield.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#ifndef TURBDISP_VERSION
#define TURBDISP_VERSION "0.0.0"
#endif

namespace turbdisp {

using json = nlohmann::ordered_json;

std::string tool_version() { return TURBDISP_VERSION; }

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::splitmix64(master);
  for (std::uint64_t v : path) h = detail::splitmix64(h ^ detail::splitmix64(v));
  return h;
}

bool RunRecord::success() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

std::string RunRecord::failure_summary() const {
  std::string s;
  for (const auto& a : assertions)
    if (!a.pass) s += "FAILED " + a.name + ": " + a.detail + "\n";
  return s;
}

namespace {

constexpr std::size_t kMetaColumns = 10;

std::string fmt(double v) { return format_number(v); }

Vec axis_point(int dim, double r) {
  Vec v = Vec::Zero(dim);
  v(0) = r;
  return v;
}

bool kappa_limit_positive(const SweepBlock& s) {
  return s.kappa_tilde.value > 0.0 && s.kappa_tilde.eps_power == 0.0;
}

double kappa_limit(const SweepBlock& s) { return kappa_limit_positive(s) ? s.kappa_tilde.value : 0.0; }

json config_json(const RunConfig& c) {
  const auto& p = c.params;
  json j;
  j["preset"] = to_string(c.preset);
  j["seed"] = c.seed;
  j["model"] = c.model;
  j["n_pairs"] = c.n_pairs;
  j["n_modes"] = c.n_modes;
  j["epsilon"] = c.epsilon;
  j["params"] = {{"alpha", p.alpha}, {"beta", p.beta}, {"e0", p.e0},     {"a", p.a},
                 {"ell0", p.ell0},   {"ell1", p.ell1}, {"dim", p.dim},   {"kappa0", c.kappa0},
                 {"finite_band", c.has_band}};
  const auto& o = c.observe;
  j["observe"] = {{"r0", o.r0},
                  {"t_min", o.t_min},
                  {"t_max", o.t_max},
                  {"n_times", o.n_times},
                  {"fit_t", {o.fit_t_min, o.fit_t_max}},
                  {"r_bins", {o.r_bin_min, o.r_bin_max, o.n_bins}},
                  {"fit_r", {o.fit_r_min, o.fit_r_max}},
                  {"lag_fraction", o.lag_fraction},
                  {"control_kappa", o.control_kappa},
                  {"dt", o.dt},
                  {"exponent_tolerance", o.exponent_tolerance}};
  if (c.sweep) {
    const auto& s = *c.sweep;
    j["sweep"] = {{"epsilons", s.epsilons},
                  {"k_cut", {{"value", s.k_cut.value}, {"eps_power", s.k_cut.eps_power}}},
                  {"l_outer", {{"value", s.l_outer.value}, {"eps_power", s.l_outer.eps_power}}},
                  {"kappa_tilde", {{"value", s.kappa_tilde.value}, {"eps_power", s.kappa_tilde.eps_power}}},
                  {"l_to_infinity", s.l_to_infinity},
                  {"threshold", s.threshold},
                  {"n_modes", s.n_modes},
                  {"n_pairs", s.n_pairs},
                  {"oracle_pairs", s.oracle_pairs},
                  {"dt_max", s.dt_max}};
  }
  return j;
}

json fit_json(const PowerLawFit& f) {
  return {{"exponent", f.exponent},
          {"prefactor", f.prefactor},
          {"ci_half_width", f.ci_half_width},
          {"window", {f.window.lo, f.window.hi}},
          {"n_points", f.n_points},
          {"max_abs_log_residual", f.max_abs_log_residual},
          {"reduced_chi2", f.reduced_chi2},
          {"weighted", f.weighted}};
}

json energy_json(const EnergyReport& e) {
  return {{"t", e.t},
          {"l2", e.l2},
          {"l2_stderr", e.l2_stderr},
          {"linf", e.linf},
          {"initial_l2", e.initial_l2},
          {"dissipation", e.dissipation},
          {"dissipation_stderr", e.dissipation_stderr},
          {"discretization_error", e.discretization_error},
          {"tail_fraction", e.tail_fraction},
          {"positive_dissipation_expected", e.positive_dissipation_expected},
          {"warnings", e.warnings}};
}

std::string iso_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PlotSpec {
  std::size_t x = 0, y = 0, err = 0;  // 1-based gnuplot columns; err 0: none
  std::string xlabel, ylabel;
  bool logx = true, logy = true;
};

class Context {
 public:
  Context(const RunConfig& c, const RunOptions& o, RunRecord& rec, unsigned threads)
      : config(c), options(o), record(rec), threads(threads) {}

  const RunConfig& config;
  const RunOptions& options;
  RunRecord& record;
  unsigned threads;
  json outputs = json::object();

  std::string name(const std::string& table) const { return to_string(config.preset) + "_" + table; }

  void check(std::string what, bool pass, std::string detail) {
    record.assertions.push_back({std::move(what), pass, std::move(detail)});
  }

  void write(const std::string& table, const std::function<void(std::ostream&)>& body,
             std::optional<PlotSpec> plot = std::nullopt) {
    const std::string file = name(table) + ".csv";
    {
      std::ofstream os(options.out_dir / file, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + (options.out_dir / file).string());
      body(os);
      if (!os) throw std::runtime_error("write failed: " + file);
    }
    record.files.push_back(file);
    if (plot && options.gnuplot) write_gnuplot(file, *plot);
  }

  TableMeta meta(std::string model, const SpectrumParams& p, double kappa,
                 std::vector<std::pair<std::string, std::string>> extra = {}) const {
    return TableMeta{std::move(model), p, kappa, config.seed, std::move(extra)};
  }

  TableMeta meta(const PairEnsemble& ens) const {
    TableMeta m = meta_of(ens);
    m.seed = config.seed;
    return m;
  }

 private:
  void write_gnuplot(const std::string& csv, const PlotSpec& s) {
    const std::string base = csv.substr(0, csv.size() - 4);
    std::ofstream gp(options.out_dir / (base + ".gp"), std::ios::binary);
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n";
    if (s.logx) gp << "set logscale x\n";
    if (s.logy) gp << "set logscale y\n";
    gp << "set xlabel '" << s.xlabel << "'\n"
       << "set ylabel '" << s.ylabel << "'\n"
       << "set terminal pngcairo size 800,600\n"
       << "set output '" << base << ".png'\n"
       << "plot '" << csv << "' using " << s.x << ":" << s.y;
    if (s.err) gp << ":" << s.err << " with yerrorbars";
    else gp << " with linespoints";
    gp << "\n";
    record.files.push_back(base + ".gp");
  }
};

std::vector<double> log_edges(double lo, double hi, std::size_t n) {
  std::vector<double> e(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    e[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n));
  return e;
}

// ---------------------------------------------------------------- structure

void run_structure(Context& ctx) {
  const RunConfig& c = ctx.config;
  const SpectrumParams& p = c.params;
  const auto& st = c.structure;
  const int d = p.dim;

  std::vector<std::vector<double>> rows;
  json points = json::array();
  double worst = 0.0;
  for (std::size_t k = 0; k < st.separations.size(); ++k) {
    const Vec r = axis_point(d, st.separations[k]);
    const double tau = st.lags[k];
    const auto est = structure_function_estimate(p, c.n_modes, r, tau, st.realizations,
                                                 derive_seed(c.seed, {1, k, 1}));
    const Mat exact = structure_function_exact(p, r, tau);
    double z_max = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double diff = std::abs(est.mean(i, j) - exact(i, j));
        const double se = est.stderr_(i, j);
        const double z = se > 0.0 ? diff / se : (diff <= 1e-12 * exact.norm() ? 0.0 : 1e300);
        z_max = std::max(z_max, z);
        rows.push_back({st.separations[k], tau, double(i), double(j), est.mean(i, j), se, exact(i, j)});
      }
    }
    worst = std::max(worst, z_max);
    points.push_back({{"r", st.separations[k]}, {"tau", tau}, {"max_z", z_max}});
  }
  ctx.check("structure tensor within 3 sigma", worst <= 3.0, "max |z| = " + fmt(worst));
  ctx.write("tensor", [&](std::ostream& os) {
    write_table_csv(os, ctx.meta("colored", p, 0.0),
                    {"r", "tau", "i", "j", "estimate", "stderr", "exact"}, rows);
  });

  // Mode autocorrelation on a jitter-free layout so every realization shares its wavevectors.
  SynthesisOptions so;
  ModeLayout layout = default_layout(c.n_modes, d);
  layout.jitter = false;
  so.layout = layout;
  const std::size_t per = static_cast<std::size_t>(2 * (d - 1));
  const std::size_t n_modes = static_cast<std::size_t>(c.n_modes);
  const std::size_t n_probe = std::min(st.probe_modes, n_modes);
  std::vector<std::size_t> modes;
  for (std::size_t j = 0; j < n_probe; ++j)
    modes.push_back(n_probe == 1 ? 0 : j * (n_modes - 1) / (n_probe - 1));
  const std::size_t n_lags = st.mode_lags.size();
  const std::size_t n_real = st.realizations;
  // [realization][mode][lag] products and [realization][mode] variances.
  std::vector<double> s01(n_real * n_probe * n_lags), s00(n_real * n_probe);
  std::vector<double> rates(n_probe);
  double residual = 0.0;
  for (std::size_t i = 0; i < n_real; ++i) {
    so.realization = i;
    SpectralField f = synthesize(p, c.n_modes, derive_seed(c.seed, {1, 1000, 2}), so);
    if (i == 0) {
      for (std::size_t m = 0; m < n_probe; ++m) rates[m] = f.modes().rates[modes[m]];
      residual = f.incompressibility_residual();
    }
    std::vector<double> x0(f.raw_amplitudes().begin(), f.raw_amplitudes().end());
    for (std::size_t m = 0; m < n_probe; ++m)
      for (std::size_t q = 0; q < per; ++q) s00[i * n_probe + m] += x0[modes[m] * per + q] * x0[modes[m] * per + q];
    double t_now = 0.0;
    for (std::size_t l = 0; l < n_lags; ++l) {
      const double target = st.mode_lags[l];
      if (target > t_now) f.advance(target - t_now);
      t_now = std::max(t_now, target);
      const auto x1 = f.raw_amplitudes();
      for (std::size_t m = 0; m < n_probe; ++m) {
        double acc = 0.0;
        for (std::size_t q = 0; q < per; ++q) acc += x0[modes[m] * per + q] * x1[modes[m] * per + q];
        s01[(i * n_probe + m) * n_lags + l] = acc;
      }
    }
    residual = std::max(residual, f.incompressibility_residual());
  }
  const std::size_t blocks = std::min<std::size_t>(20, n_real);
  std::vector<std::vector<double>> ou_rows;
  double ou_worst = 0.0;
  for (std::size_t m = 0; m < n_probe; ++m) {
    for (std::size_t l = 0; l < n_lags; ++l) {
      auto stat = [&](std::size_t skip) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < n_real; ++i) {
          if (skip < blocks && i * blocks / n_real == skip) continue;
          a += s01[(i * n_probe + m) * n_lags + l];
          b += s00[i * n_probe + m];
        }
        return a / b;
      };
      const auto jk = jackknife(blocks, stat);
      const double expect = std::exp(-rates[m] * st.mode_lags[l]);
      const double z = jk.stderr_ > 0.0 ? std::abs(jk.estimate - expect) / jk.stderr_ : 0.0;
      ou_worst = std::max(ou_worst, z);
      ou_rows.push_back({double(modes[m]), rates[m], st.mode_lags[l], jk.estimate, jk.stderr_, expect});
    }
  }
  ctx.check("mode autocorrelation within 3 sigma", ou_worst <= 3.0, "max |z| = " + fmt(ou_worst));
  ctx.check("incompressibility residual below 1e-12", residual < 1e-12, "residual = " + fmt(residual));
  ctx.write("autocorrelation", [&](std::ostream& os) {
    write_table_csv(os, ctx.meta("colored", p, 0.0),
                    {"mode", "rate", "lag", "estimate", "stderr", "exact"}, ou_rows);
  });
  ctx.outputs["structure_points"] = points;
  ctx.outputs["structure_max_z"] = worst;
  ctx.outputs["autocorrelation_max_z"] = ou_worst;
  ctx.outputs["incompressibility_residual"] = residual;
}

// ------------------------------------------------------ pair ensembles

PairEnsemble pair_ensemble(const RunConfig& c, const SpectrumParams& p, double kappa, std::uint64_t seed,
                           unsigned threads) {
  const auto& o = c.observe;
  const std::vector<double> times = log_time_grid(o.t_min, o.t_max, o.n_times);
  const Vec x0 = axis_point(p.dim, o.r0);
  if (c.model == "kraichnan") {
    const KraichnanOracle oracle(p, kappa, c.has_band ? std::optional<Band>(p.band()) : std::nullopt);
    LimitSimOptions lo;
    lo.sample_times = times;
    lo.dt_max = o.dt;
    lo.threads = threads;
    return simulate_limit_pairs(oracle, x0, c.n_pairs, seed, lo);
  }
  PairSimOptions so;
  so.sample_times = times;
  so.n_modes = c.n_modes;
  so.random_direction = true;
  so.threads = threads;
  so.dt = o.dt > 0.0 ? o.dt : std::min(stable_dt(p, p.band(), 1.0, so.c_dt), o.t_max / 2000.0);
  return simulate_pairs(p, x0, kappa, c.n_pairs, seed, so);
}

std::optional<double> expected_msd_exponent(const RunConfig& c) {
  const auto& p = c.params;
  if (p.e0 == 0.0) return 1.0;
  if (c.model == "kraichnan") {
    const double q = 2.0 - p.alpha - p.beta;
    if (q > 0.0) return 1.0 / q;
    return std::nullopt;
  }
  return exponents(p).p;
}

void exponent_check(Context& ctx, const std::string& what, double fitted, std::optional<double> expected) {
  const double tol = ctx.config.observe.exponent_tolerance;
  if (!expected || tol == 0.0) return;
  const double rel = std::abs(fitted / *expected - 1.0);
  ctx.check(what, rel <= tol,
            "fitted " + fmt(fitted) + " vs " + fmt(*expected) + " (relative error " + fmt(rel) +
                ", tolerance " + fmt(tol) + ")");
}

void run_richardson(Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto ens = pair_ensemble(c, c.params, c.kappa0, derive_seed(c.seed, {2, 0, 1}), ctx.threads);
  const Series m = msd(ens);
  ctx.write("msd", [&](std::ostream& os) { write_series_csv(os, m, ctx.meta(ens), "t", "msd"); },
            PlotSpec{kMetaColumns + 1, kMetaColumns + 2, kMetaColumns + 3, "t", "<|x|^2>"});
  const PowerLawFit fit = fit_power_law(m, {c.observe.fit_t_min, c.observe.fit_t_max});
  const auto expected = expected_msd_exponent(c);
  ctx.outputs["msd_fit"] = fit_json(fit);
  ctx.outputs["expected_exponent"] = expected ? json(*expected) : json(nullptr);
  ctx.outputs["steps_taken"] = ens.steps_taken;
  std::size_t absorbed = 0;
  for (auto a : ens.absorbed) absorbed += a;
  ctx.outputs["absorbed_pairs"] = absorbed;
  exponent_check(ctx, "msd exponent", fit.exponent, expected);
}

void run_four_thirds(Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto& o = c.observe;
  const auto edges = log_edges(o.r_bin_min, o.r_bin_max, o.n_bins);
  DiffusivityOptions dopt;
  dopt.lag_fraction = o.lag_fraction;

  const auto ens = pair_ensemble(c, c.params, c.kappa0, derive_seed(c.seed, {3, 0, 1}), ctx.threads);
  const auto bins = relative_diffusivity(ens, edges, dopt);
  ctx.write("diffusivity", [&](std::ostream& os) { write_diffusivity_csv(os, bins, ctx.meta(ens)); },
            PlotSpec{kMetaColumns + 3, kMetaColumns + 4, kMetaColumns + 5, "r", "K(r)"});
  const Series s = diffusivity_series(bins);
  const PowerLawFit fit = fit_power_law(s, {o.fit_r_min, o.fit_r_max});
  ctx.outputs["diffusivity_fit"] = fit_json(fit);
  std::optional<double> expected;
  if (c.params.e0 > 0.0)
    expected = c.model == "kraichnan" ? 2.0 * (c.params.alpha + c.params.beta - 1.0) : 2.0 * exponents(c.params).eta;
  ctx.outputs["expected_slope"] = expected ? json(*expected) : json(nullptr);
  exponent_check(ctx, "diffusivity slope", fit.exponent, expected);

  // Null-field control: flat at kappa / 2.
  SpectrumParams p0 = c.params;
  p0.e0 = 0.0;
  const double kc = o.control_kappa;
  const auto ctl = pair_ensemble(c, p0, kc, derive_seed(c.seed, {3, 1, 1}), ctx.threads);
  const auto cbins = relative_diffusivity(ctl, edges, dopt);
  ctx.write("control_diffusivity", [&](std::ostream& os) { write_diffusivity_csv(os, cbins, ctx.meta(ctl)); },
            PlotSpec{kMetaColumns + 3, kMetaColumns + 4, kMetaColumns + 5, "r", "K(r)"});
  double worst = 0.0;
  std::size_t present = 0;
  for (const auto& b : cbins) {
    if (b.missing) continue;
    ++present;
    worst = std::max(worst, std::abs(b.value - 0.5 * kc) / b.stderr_);
  }
  ctx.outputs["control"] = {{"kappa", kc}, {"bins", present}, {"max_z", worst}};
  ctx.check("null-field diffusivity flat at kappa/2 within 3 sigma", present > 0 && worst <= 3.0,
            fmt(double(present)) + " bins, max |z| = " + fmt(worst));
}

// ----------------------------------------------------- epsilon sweep

std::optional<Band> oracle_band(const SweepBlock& s) {
  const double eps = s.epsilons.back();
  if (s.l_to_infinity && s.k_cut.eps_power > 0.0) return std::nullopt;
  return Band{1.0 / s.l_outer.at(eps), s.k_cut.at(eps)};
}

void run_kraichnan_limit(Context& ctx) {
  const RunConfig& c = ctx.config;
  if (!c.sweep) throw ConfigError("kraichnan-limit needs a [sweep] section");
  const SweepBlock& s = *c.sweep;
  const SpectrumParams& p = c.params;
  const auto& o = c.observe;
  const std::vector<double> times = log_time_grid(o.t_min, o.t_max, o.n_times);
  const Vec x0 = axis_point(p.dim, o.r0);
  const Window window{o.fit_t_min, o.fit_t_max};

  const KraichnanOracle oracle(p, kappa_limit(s), oracle_band(s));
  LimitSimOptions lo;
  lo.sample_times = times;
  lo.threads = ctx.threads;
  const auto lens = simulate_limit_pairs(oracle, x0, s.oracle_pairs, derive_seed(c.seed, {4, 0, 1}), lo);
  const Series om = msd(lens);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < om.t.size(); ++i) rows.push_back({0.0, om.t[i], om.y[i], om.se[i]});
  std::vector<double> distances;
  json per = json::array();
  for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
    const double eps = s.epsilons[k];
    const Band band{1.0 / s.l_outer.at(eps), s.k_cut.at(eps)};
    const RescaleSpec rs = RescaleSpec::white_noise(p, eps, s.kappa_tilde.at(eps), band);
    PairSimOptions so;
    so.sample_times = times;
    so.n_modes = s.n_modes;
    so.random_direction = true;
    so.threads = ctx.threads;
    const double cap = s.dt_max > 0.0 ? s.dt_max : o.t_max / 2000.0;
    so.dt = std::min(stable_dt(p, band, rs.time_speed(p), so.c_dt), cap);
    // Common random numbers across epsilon.
    const auto ens = simulate_rescaled(p, rs, x0, s.n_pairs, derive_seed(c.seed, {4, 1, 1}), so);
    const Series m = msd(ens);
    for (std::size_t i = 0; i < m.t.size(); ++i) rows.push_back({eps, m.t[i], m.y[i], m.se[i]});
    const double dist = curve_distance(m, om, window);
    distances.push_back(dist);
    per.push_back({{"epsilon", eps},
                   {"band", {band.k_min, band.k_max}},
                   {"kappa_tilde", rs.kappa_tilde},
                   {"drift_prefactor", rs.drift_prefactor(p)},
                   {"time_speed", rs.time_speed(p)},
                   {"small_parameter", rs.small_parameter(p)},
                   {"dt", so.dt},
                   {"steps_taken", ens.steps_taken},
                   {"distance", dist}});
  }
  ctx.write("msd", [&](std::ostream& os) {
    write_table_csv(os, ctx.meta("colored", p, kappa_limit(s)), {"epsilon", "t", "msd", "stderr"}, rows);
  });
  const ConvergenceTrace trace = make_trace(s.epsilons, distances);
  ctx.outputs["sweep"] = per;
  ctx.outputs["trace"] = {{"epsilons", trace.epsilons},
                          {"distances", trace.distances},
                          {"strictly_decreasing", trace.strictly_decreasing}};
  ctx.outputs["oracle"] = {{"kappa0", oracle.kappa0()},
                           {"unbounded", oracle.unbounded()},
                           {"pairs", s.oracle_pairs},
                           {"steps_taken", lens.steps_taken}};
  std::string detail;
  for (double d : distances) detail += (detail.empty() ? "" : ", ") + fmt(d);
  ctx.check("distance to the limit strictly decreasing in epsilon", trace.strictly_decreasing, detail);
}

// ------------------------------------------------------------ scalar

Transport make_transport(const RunConfig& c) {
  const auto& sc = c.scalar;
  const Band band{sc.band_min, sc.band_max};
  if (sc.transport == "white") {
    WhiteTransport w;
    w.params = c.params;
    w.band = band;
    w.n_modes = c.n_modes;
    w.dt = sc.dt;
    return w;
  }
  ColoredTransport t;
  t.params = c.params;
  t.rescale = RescaleSpec::white_noise(c.params, sc.epsilon, 0.0, band);
  t.n_modes = c.n_modes;
  t.dt = sc.dt;
  return t;
}

Profile make_profile(const ScalarBlock& sc) {
  Vec center(static_cast<Eigen::Index>(sc.center.size()));
  for (std::size_t i = 0; i < sc.center.size(); ++i) center(static_cast<Eigen::Index>(i)) = sc.center[i];
  if (sc.profile == "cosine") return Profile::cosine_bump(center, sc.width);
  if (sc.profile == "indicator") return Profile::indicator(center, sc.width);
  return Profile::gaussian(center, sc.width);
}

void run_dissipation(Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto& sc = c.scalar;
  const Transport tr = make_transport(c);
  const Profile initial = make_profile(sc);
  const Vec center = initial.center();
  const BoxGrid grid = BoxGrid::centered(center, sc.grid_half_width, sc.grid_cells);
  ScalarProbe probe;
  probe.initial = initial;
  probe.points = grid.points();
  probe.kappa_tilde = sc.kappa_tilde;
  probe.mc_paths = sc.mc_paths;
  const std::string run_id = to_string(c.preset) + "-" + std::to_string(c.seed);
  const auto seed = derive_seed(c.seed, {5, 0, 1});

  json reports = json::object();
  std::vector<std::vector<double>> rows;
  std::vector<EnergyReport> series;
  bool max_ok = true;
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sc.times.size(); ++k) {
    const double t = sc.times[k];
    ScalarValues values;
    const EnergyReport rep = energy_with_step_doubling(tr, probe, grid, t, seed, ctx.threads, 1e-4, &values);
    const MaxPrinciple mp = max_principle_check(values, probe);
    max_ok = max_ok && mp.pass;
    min_margin = std::min(min_margin, mp.margin);
    series.push_back(rep);
    reports[run_id + "/t=" + fmt(t)] = energy_json(rep);
    rows.push_back({t, rep.l2, rep.l2_stderr, rep.linf, rep.dissipation, rep.dissipation_stderr,
                    rep.discretization_error, rep.tail_fraction});
    ctx.write("scalar_t" + fmt(t), [&](std::ostream& os) { write_scalar_csv(os, probe.points, values); });
  }
  ctx.write("energy", [&](std::ostream& os) {
    write_table_csv(os, ctx.meta(sc.transport, c.params, sc.kappa_tilde),
                    {"t", "l2", "l2_stderr", "linf", "dissipation", "dissipation_stderr",
                     "discretization_error", "tail_fraction"},
                    rows);
  }, PlotSpec{kMetaColumns + 1, kMetaColumns + 5, kMetaColumns + 6, "t", "||T0||^2 - ||Tt||^2", false, false});
  ctx.outputs["energy_reports"] = reports;
  ctx.check("maximum principle", max_ok, "min margin " + fmt(min_margin));

  if (sc.kappa_tilde > 0.0) {
    double worst = std::numeric_limits<double>::infinity();
    bool increasing = true;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto& e = series[k];
      worst = std::min(worst, e.dissipation_stderr > 0.0 ? e.dissipation / e.dissipation_stderr : e.dissipation);
      if (k && !(e.dissipation > series[k - 1].dissipation)) increasing = false;
    }
    ctx.check("dissipation non-negative within 3 sigma", worst >= -3.0, "min residual/stderr = " + fmt(worst));
    ctx.check("dissipation increasing in t", increasing, fmt(double(series.size())) + " times");
  }

  if (sc.control_pure_transport) {
    const BoxGrid cg = BoxGrid::centered(center, sc.grid_half_width, sc.control_grid_cells);
    ScalarProbe cp;
    cp.initial = initial;
    cp.points = cg.points();
    cp.kappa_tilde = 0.0;
    cp.mc_paths = 1;
    const auto cseed = derive_seed(c.seed, {5, 1, 1});
    ScalarOptions so;
    so.threads = ctx.threads;
    const ScalarValues v = evaluate_scalar(tr, cp, sc.control_time, cseed, so);
    const MaxPrinciple mp = max_principle_check(v, cp);
    const TwoSampleResult ks = measure_preservation(v, cp, derive_seed(c.seed, {5, 1, 2}));
    const auto phi = [](double x) { return x * x * x - 0.5 * x; };
    const FunctionOfScalarReport fs = function_of_scalar_check(tr, cp, phi, sc.control_time, cseed, ctx.threads);
    ctx.outputs["pure_transport"] = {{"t", sc.control_time},
                                     {"points", cp.points.size()},
                                     {"ks_statistic", ks.statistic},
                                     {"ks_threshold", ks.threshold},
                                     {"ks_pass", ks.pass},
                                     {"phi_max_abs_difference", fs.max_abs_difference},
                                     {"max_principle_margin", mp.margin}};
    ctx.check("pure transport maximum principle", mp.pass, "margin " + fmt(mp.margin));
    ctx.check("pure transport preserves the value distribution", ks.pass,
              "KS " + fmt(ks.statistic) + " vs threshold " + fmt(ks.threshold));
    ctx.check("functions of the scalar commute with transport", fs.pass,
              "max difference " + fmt(fs.max_abs_difference));
    ctx.write("pure_transport", [&](std::ostream& os) { write_scalar_csv(os, cp.points, v); });
  }
}

// ---------------------------------------------------------- boundary

void run_boundary(Context& ctx) {
  const RunConfig& c = ctx.config;
  const SpectrumParams& p = c.params;
  const auto rep = classify_regime(p, c.kappa0 > 0.0);
  const auto ex = exponents(p);
  ctx.outputs["regime"] = to_string(rep.regime);
  ctx.outputs["q"] = ex.q;
  ctx.check("configuration on the boundary", rep.regime == Regime::Boundary,
            "alpha + 2 beta = " + fmt(p.alpha + 2.0 * p.beta));

  const auto& o = c.observe;
  const RescaleSpec rs = RescaleSpec::frozen(p, c.epsilon, c.kappa0, p.band());
  PairSimOptions so;
  so.sample_times = log_time_grid(o.t_min, o.t_max, o.n_times);
  so.n_modes = c.n_modes;
  so.random_direction = true;
  so.threads = ctx.threads;
  so.dt = o.dt > 0.0 ? o.dt : std::min(stable_dt(p, p.band(), rs.time_speed(p), so.c_dt), o.t_max / 2000.0);
  const auto ens = simulate_rescaled(p, rs, axis_point(p.dim, o.r0), c.n_pairs, derive_seed(c.seed, {6, 0, 1}), so);
  const Series m = msd(ens);
  ctx.write("msd", [&](std::ostream& os) {
    auto meta = ctx.meta(ens);
    meta.extra = {{"epsilon", fmt(c.epsilon)}};
    write_series_csv(os, m, meta, "t", "msd");
  }, PlotSpec{kMetaColumns + 2, kMetaColumns + 3, kMetaColumns + 4, "t", "<|x|^2>"});
  const PowerLawFit fit = fit_power_law(m, {o.fit_t_min, o.fit_t_max});
  ctx.outputs["msd_fit"] = fit_json(fit);
  ctx.outputs["rescaling"] = {{"epsilon", c.epsilon},
                              {"drift_prefactor", rs.drift_prefactor(p)},
                              {"time_speed", rs.time_speed(p)},
                              {"dt", so.dt}};
  exponent_check(ctx, "msd exponent", fit.exponent, ex.p);
}

}  // namespace

// ----------------------------------------------------------- validate

ValidationReport validate_config(const RunConfig& c) {
  ValidationReport r;
  r.config = c;
  LimitOptions lopt;
  bool kappa_positive = c.kappa0 > 0.0;
  if (c.preset == Preset::Dissipation) kappa_positive = c.scalar.kappa_tilde > 0.0;
  if (c.sweep) {
    lopt.l_to_infinity = c.sweep->l_to_infinity;
    lopt.kappa_tilde_zero = c.sweep->kappa_tilde.value == 0.0;
    kappa_positive = kappa_limit_positive(*c.sweep);
  }
  r.regime = classify_regime(c.params, kappa_positive, lopt);
  r.exponents = exponents(c.params);
  if (c.sweep) {
    const auto& s = *c.sweep;
    ConstraintAudit a;
    a.threshold = s.threshold;
    a.epsilons = s.epsilons;
    for (const auto& m : r.regime.constraints) {
      ConstraintEntry e;
      e.monomial = m;
      for (double eps : s.epsilons)
        e.values.push_back(m.evaluate(eps, s.k_cut.at(eps), s.l_outer.at(eps), s.kappa_tilde.at(eps)));
      e.at_smallest = e.values.back();
      e.pass = e.at_smallest < s.threshold;
      a.pass = a.pass && e.pass;
      a.entries.push_back(e);
    }
    r.audit = a;
  }
  return r;
}

std::string ValidationReport::text() const {
  std::ostringstream os;
  const auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };
  const auto& p = config.params;
  os << "preset: " << to_string(config.preset) << "\n"
     << "regime: " << to_string(regime.regime) << " (alpha + 2 beta = " << fmt(p.alpha + 2.0 * p.beta)
     << ", alpha + beta = " << fmt(p.alpha + p.beta) << ")\n"
     << "exponents: q = " << fmt(exponents.q);
  if (exponents.p) os << ", p = " << fmt(*exponents.p);
  os << ", eta = " << fmt(exponents.eta) << ", 2 eta = " << fmt(2.0 * exponents.eta) << "\n";
  if (regime.kolmogorov) os << "kolmogorov point\n";
  if (!audit) {
    os << "constraints: no epsilon sweep configured";
    if (!regime.constraints.empty()) {
      os << "; rates to drive to zero:";
      for (const auto& m : regime.constraints) os << " " << m.expression();
    }
    os << "\n";
    return os.str();
  }
  os << "constraints (threshold " << fmt(audit->threshold) << " at eps = " << fmt(audit->epsilons.back())
     << "):\n";
  if (audit->entries.empty()) os << "  none\n";
  for (const auto& e : audit->entries) {
    os << "  " << e.monomial.source << ": " << e.monomial.expression() << " =";
    for (double v : e.values) os << " " << fmt(v);
    os << (e.pass ? "  ok" : "  VIOLATED") << "\n";
  }
  os << "audit: " << (audit->pass ? "pass" : "fail") << "\n";
  return os.str();
}

nlohmann::ordered_json ValidationReport::json() const {
  nlohmann::ordered_json j;
  j["regime"] = to_string(regime.regime);
  j["kolmogorov"] = regime.kolmogorov;
  j["l_limit_admissible"] = regime.l_limit_admissible;
  j["exponents"] = {{"q", exponents.q},
                    {"p", exponents.p ? nlohmann::ordered_json(*exponents.p) : nlohmann::ordered_json(nullptr)},
                    {"eta", exponents.eta},
                    {"two_eta", 2.0 * exponents.eta}};
  auto constraints = nlohmann::ordered_json::array();
  if (audit) {
    for (const auto& e : audit->entries)
      constraints.push_back({{"source", e.monomial.source},
                             {"expression", e.monomial.expression()},
                             {"values", e.values},
                             {"at_smallest_epsilon", e.at_smallest},
                             {"pass", e.pass}});
    j["audit"] = {{"threshold", audit->threshold},
                  {"epsilons", audit->epsilons},
                  {"constraints", constraints},
                  {"pass", audit->pass}};
  } else {
    for (const auto& m : regime.constraints)
      constraints.push_back({{"source", m.source}, {"expression", m.expression()}});
    j["constraints"] = constraints;
  }
  return j;
}

// ---------------------------------------------------------------- run

RunRecord run(const RunConfig& config, const RunOptions& options) {
  const ValidationReport report = validate_config(config);
  if (report.audit && !report.audit->pass) {
    std::string msg = "epsilon schedule violates the regime constraints:";
    for (const auto& e : report.audit->entries)
      if (!e.pass)
        msg += "\n  " + e.monomial.source + ": " + e.monomial.expression() + " = " + fmt(e.at_smallest) +
               " at eps = " + fmt(report.audit->epsilons.back()) + " (threshold " +
               fmt(report.audit->threshold) + ")";
    throw ConstraintViolation(msg);
  }
  std::filesystem::create_directories(options.out_dir);
  const unsigned threads =
      options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());

  RunRecord rec;
  const std::string started = iso_utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx(config, options, rec, threads);
  switch (config.preset) {
    case Preset::Structure: run_structure(ctx); break;
    case Preset::Richardson: run_richardson(ctx); break;
    case Preset::FourThirds: run_four_thirds(ctx); break;
    case Preset::KraichnanLimit: run_kraichnan_limit(ctx); break;
    case Preset::Dissipation: run_dissipation(ctx); break;
    case Preset::Boundary: run_boundary(ctx); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json& j = rec.json;
  j["tool"] = "turbdisp";
  j["version"] = tool_version();
  j["run_id"] = to_string(config.preset) + "-" + std::to_string(config.seed);
  j["preset"] = to_string(config.preset);
  j["seed"] = config.seed;
  j["threads"] = threads;
  j["started_at"] = started;
  j["wall_time_s"] = wall;
  j["config"] = config_json(config);
  j["config_ini"] = to_ini(config);
  j["regime"] = report.json();
  j["outputs"] = ctx.outputs;
  auto asserts = json::array();
  for (const auto& a : rec.assertions) asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  j["assertions"] = asserts;
  rec.files.push_back("run_record.json");
  j["files"] = rec.files;
  j["success"] = rec.success();
  std::ofstream os(options.out_dir / "run_record.json", std::ios::binary);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write run_record.json");
  return rec;
}

}  // namespace turbdisp
