// Acceptance criteria 1-9: one PASS/FAIL line each. Tolerances are pinned here.

#include "turbdisp/config.hpp"
#include "turbdisp/kraichnan.hpp"
#include "turbdisp/params.hpp"
#include "turbdisp/runner.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace turbdisp;
namespace fs = std::filesystem;

namespace {

constexpr double kCAlphaTol = 1e-12;
constexpr double kGammaTol = 1e-12;
constexpr double kExponentExactTol = 1e-12;
constexpr double kClosedFormTol = 1e-3;
constexpr double kRichardsonTol = 0.10;
constexpr double kFourThirdsTol = 0.10;
constexpr double kMinFitDecades = 1.0;
constexpr double kStructureBudget = 120.0;
constexpr double kRichardsonBudget = 120.0;
constexpr double kFourThirdsBudget = 120.0;
constexpr double kSweepBudget = 900.0;
constexpr double kScalarBudget = 300.0;
constexpr unsigned kManyThreads = 4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o, double seconds) {
  std::printf("criterion %d %s: %s (%s; %.1f s)\n", id, title.c_str(), o.pass ? "PASS" : "FAIL",
              o.detail.c_str(), seconds);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path work_dir() {
  const fs::path p = fs::temp_directory_path() / "turbdisp_acceptance";
  fs::create_directories(p);
  return p;
}

struct PresetRun {
  RunRecord record;
  double seconds = 0.0;
  fs::path dir;
};

PresetRun run_preset(const RunConfig& c, const std::string& tag, unsigned threads) {
  PresetRun r;
  r.dir = work_dir() / tag;
  fs::remove_all(r.dir);
  RunOptions o;
  o.out_dir = r.dir;
  o.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  r.record = run(c, o);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string assertion_summary(const RunRecord& rec) {
  std::string s;
  for (const auto& a : rec.assertions)
    if (!a.pass) s += (s.empty() ? "" : "; ") + a.name + ": " + a.detail;
  return s.empty() ? "all preset checks pass" : s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome constants() {
  const double c = c_alpha(1.5, 3);
  const double rel_c = std::abs(c / (8.0 * std::numbers::pi) - 1.0);
  using big = boost::multiprecision::cpp_bin_float_50;
  const std::vector<double> xs = {-1.5, -0.5, 0.05, 0.1,  0.3, 0.5, 0.7, 0.9,  1.0,  1.1,
                                  1.35, 1.65, 2.0,  2.25, 2.8, 3.5, 4.2, 5.75, 7.25, 9.5};
  double worst = 0.0;
  for (double x : xs) {
    const big exact = boost::math::tgamma(big(x));
    const double rel = std::abs(static_cast<double>((big(lanczos_gamma(x)) - exact) / exact));
    worst = std::max(worst, rel);
  }
  return {rel_c <= kCAlphaTol && worst <= kGammaTol,
          "C(3/2,3)/(8 pi) - 1 = " + num(rel_c) + ", worst Gamma relative error " + num(worst) +
              " over 20 points"};
}

Outcome kolmogorov() {
  const auto p = make_params_direct(4.0 / 3.0, 1.0 / 3.0, 1.0, 1.0, 1.0, 1e-3, 3);
  const auto ex = exponents(p);
  const double dp = ex.p ? std::abs(*ex.p - 3.0) : 1.0;
  const double de = std::abs(2.0 * ex.eta - 4.0 / 3.0);
  const auto rep = classify_regime(p, false);
  return {dp <= kExponentExactTol && de <= kExponentExactTol && rep.kolmogorov,
          "p = " + num(ex.p.value_or(0.0)) + ", 2 eta = " + num(2.0 * ex.eta) + ", |dp| = " + num(dp) +
              ", |d2eta| = " + num(de)};
}

Outcome closed_form() {
  double worst = 0.0;
  for (int d : {2, 3}) {
    for (auto [alpha, beta] : {std::pair{1.2, 0.45}, std::pair{1.3, 0.4}}) {
      const auto p = make_params_direct(alpha, beta, 1.0, 1.0, 1.0, 1e-3, d);
      const KraichnanOracle o(p, 0.0);
      Vec dir(d);
      if (d == 2) dir << 1.0, 2.0;
      else dir << 1.0, 2.0, -1.0;
      dir.normalize();
      for (int i = 0; i < 10; ++i) {
        const double r = 0.1 * std::pow(100.0, i / 9.0);
        const Vec x = r * dir;
        const Mat q = o.gamma1(x, x);
        const Mat c = o.gamma1_closed(x);
        worst = std::max(worst, (q - c).norm() / c.norm());
      }
    }
  }
  return {worst <= kClosedFormTol, "worst relative difference " + num(worst) + " over 40 cases"};
}

Outcome synthesis() {
  const RunConfig c = parse_config(preset_ini(Preset::Structure));
  const auto r = run_preset(c, "structure", 0);
  const bool ok = c.structure.realizations >= 10000 && c.n_modes == 256 && c.structure.separations.size() >= 5;
  const auto& out = r.record.json["outputs"];
  return {ok && r.record.success() && r.seconds < kStructureBudget,
          "tensor max|z| " + num(out["structure_max_z"].get<double>()) + ", autocorrelation max|z| " +
              num(out["autocorrelation_max_z"].get<double>()) + ", residual " +
              num(out["incompressibility_residual"].get<double>()) + "; " + assertion_summary(r.record) +
              "; " + num(r.seconds) + " s of " + num(kStructureBudget)};
}

Outcome richardson() {
  RunConfig c = parse_config(preset_ini(Preset::Richardson));
  c.observe.exponent_tolerance = kRichardsonTol;
  const auto r = run_preset(c, "richardson", 0);
  const auto& fit = r.record.json["outputs"]["msd_fit"];
  const double e = fit["exponent"].get<double>();
  const double target = 1.0 / (2.0 - c.params.alpha - c.params.beta);
  const double decades = std::log10(c.observe.fit_t_max / c.observe.fit_t_min);
  const bool ok = std::abs(e / target - 1.0) <= kRichardsonTol && decades >= kMinFitDecades &&
                  c.n_pairs >= 10000 && c.kappa0 == 0.0;
  return {ok && r.record.success() && r.seconds < kRichardsonBudget,
          "exponent " + num(e) + " +- " + num(fit["ci_half_width"].get<double>()) + " vs " + num(target) +
              " over " + num(decades) + " decades; " + num(r.seconds) + " s of " + num(kRichardsonBudget)};
}

Outcome four_thirds() {
  RunConfig c = parse_config(preset_ini(Preset::FourThirds));
  c.observe.exponent_tolerance = kFourThirdsTol;
  const auto r = run_preset(c, "four-thirds", 0);
  const auto& out = r.record.json["outputs"];
  const double slope = out["diffusivity_fit"]["exponent"].get<double>();
  const double target = 2.0 * (c.params.alpha + c.params.beta - 1.0);
  const bool ok = std::abs(slope / target - 1.0) <= kFourThirdsTol;
  return {ok && r.record.success() && r.seconds < kFourThirdsBudget,
          "slope " + num(slope) + " vs " + num(target) + ", control max|z| " +
              num(out["control"]["max_z"].get<double>()) + " over " +
              num(out["control"]["bins"].get<double>()) + " bins; " + assertion_summary(r.record) + "; " +
              num(r.seconds) + " s of " + num(kFourThirdsBudget)};
}

Outcome sweep() {
  const RunConfig c = parse_config(preset_ini(Preset::KraichnanLimit));
  const auto v = validate_config(c);
  if (!v.audit || !v.audit->pass) return {false, "schedule fails the constraint audit"};
  const auto r = run_preset(c, "kraichnan-limit", 0);
  const auto& tr = r.record.json["outputs"]["trace"];
  std::string d;
  for (const auto& x : tr["distances"]) d += (d.empty() ? "" : ", ") + num(x.get<double>());
  return {tr["strictly_decreasing"].get<bool>() && r.seconds < kSweepBudget,
          "distances at eps 0.4, 0.2, 0.1: " + d + "; audit pass; " + num(r.seconds) + " s of " +
              num(kSweepBudget)};
}

Outcome scalar() {
  const RunConfig c = parse_config(preset_ini(Preset::Dissipation));
  const bool configured = c.scalar.kappa_tilde > 0.0 && c.scalar.control_pure_transport && c.scalar.times.size() >= 2;
  const auto r = run_preset(c, "dissipation", 0);
  return {configured && r.record.success() && r.seconds < kScalarBudget,
          assertion_summary(r.record) + "; " + num(r.seconds) + " s of " + num(kScalarBudget)};
}

Outcome determinism() {
  // Smaller ensembles; the code paths are those of the full presets.
  std::vector<RunConfig> configs;
  for (Preset p : all_presets()) {
    RunConfig c = parse_config(preset_ini(p));
    c.seed = 20261019;
    c.n_pairs = std::min<std::size_t>(c.n_pairs, 300);
    c.structure.realizations = 200;
    c.observe.exponent_tolerance = 0.0;
    if (c.sweep) {
      c.sweep->n_pairs = 40;
      c.sweep->oracle_pairs = 100;
      c.sweep->epsilons = {0.4, 0.1};
    }
    c.scalar.grid_cells = 12;
    c.scalar.mc_paths = 8;
    c.scalar.control_grid_cells = 30;
    configs.push_back(c);
  }
  std::size_t compared = 0;
  std::string mismatch;
  for (const auto& c : configs) {
    const auto a = run_preset(c, "det1_" + to_string(c.preset), 1);
    const auto b = run_preset(c, "detN_" + to_string(c.preset), kManyThreads);
    for (const auto& f : a.record.files) {
      if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
      ++compared;
      if (slurp(a.dir / f) != slurp(b.dir / f)) mismatch += (mismatch.empty() ? "" : ", ") + f;
    }
  }
  return {mismatch.empty() && compared > 0,
          std::to_string(compared) + " CSV files over 6 presets, 1 vs " + std::to_string(kManyThreads) +
              " threads" + (mismatch.empty() ? ", byte-identical" : "; differ: " + mismatch)};
}

}  // namespace

int main() {
  criterion(1, "constants", constants);
  criterion(2, "kolmogorov exponents", kolmogorov);
  criterion(3, "closed form vs quadrature", closed_form);
  criterion(4, "synthesis fidelity", synthesis);
  criterion(5, "richardson exponent", richardson);
  criterion(6, "four-thirds slope", four_thirds);
  criterion(7, "epsilon sweep convergence", sweep);
  criterion(8, "scalar diagnostics", scalar);
  criterion(9, "determinism", determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
