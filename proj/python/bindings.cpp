#include "turbdisp/config.hpp"
#include "turbdisp/kraichnan.hpp"
#include "turbdisp/pairdisp.hpp"
#include "turbdisp/params.hpp"
#include "turbdisp/runner.hpp"
#include "turbdisp/statkit.hpp"
#include "turbdisp/synthfield.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace turbdisp;

namespace {

Vec to_vec(const std::vector<double>& x) {
  if (x.size() < 2 || x.size() > 3) throw py::value_error("points must have 2 or 3 components");
  Vec v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  return v;
}

Eigen::MatrixXd to_dense(const Mat& m) { return m; }
Eigen::VectorXd to_dense(const Vec& v) { return v; }

py::array_t<double> positions(const PairEnsemble& e) {
  py::array_t<double> out({e.n_pairs, e.times.size(), static_cast<std::size_t>(e.dim)});
  std::copy(e.data.begin(), e.data.end(), out.mutable_data());
  return out;
}

py::dict series_dict(const Series& s) {
  py::dict d;
  d["t"] = s.t;
  d["y"] = s.y;
  d["se"] = s.se;
  return d;
}

Series series_from(const std::vector<double>& t, const std::vector<double>& y,
                   const std::vector<double>& se) {
  if (t.size() != y.size() || (!se.empty() && se.size() != t.size()))
    throw py::value_error("t, y and se must have equal lengths");
  return Series{t, y, se};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of turbdisp";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConstraintViolation>(m, "ConstraintViolation", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_ValueError);

  py::class_<SpectrumParams>(m, "SpectrumParams")
      .def_readonly("alpha", &SpectrumParams::alpha)
      .def_readonly("beta", &SpectrumParams::beta)
      .def_readonly("e0", &SpectrumParams::e0)
      .def_readonly("a", &SpectrumParams::a)
      .def_readonly("ell0", &SpectrumParams::ell0)
      .def_readonly("ell1", &SpectrumParams::ell1)
      .def_readonly("dim", &SpectrumParams::dim)
      .def("__repr__", [](const SpectrumParams& p) {
        return "SpectrumParams(alpha=" + std::to_string(p.alpha) + ", beta=" + std::to_string(p.beta) +
               ", dim=" + std::to_string(p.dim) + ")";
      });

  m.def("make_params", &make_params, py::arg("alpha"), py::arg("beta"), py::arg("u0"), py::arg("c0"),
        py::arg("ell0"), py::arg("ell1"), py::arg("dim"));
  m.def("make_params_direct", &make_params_direct, py::arg("alpha"), py::arg("beta"), py::arg("e0"),
        py::arg("a"), py::arg("ell0"), py::arg("ell1"), py::arg("dim"));
  m.def("c_alpha", &c_alpha, py::arg("alpha"), py::arg("dim"));
  m.def("gamma", &lanczos_gamma, py::arg("x"));

  m.def("exponents", [](const SpectrumParams& p) {
    const auto e = exponents(p);
    py::dict d;
    d["q"] = e.q;
    d["p"] = e.p;
    d["eta"] = e.eta;
    d["nu"] = e.nu;
    return d;
  });
  m.def(
      "regime",
      [](const SpectrumParams& p, bool kappa0_positive) {
        const auto r = classify_regime(p, kappa0_positive);
        py::dict d;
        d["regime"] = to_string(r.regime);
        d["kolmogorov"] = r.kolmogorov;
        d["n_constraints"] = r.constraints.size();
        return d;
      },
      py::arg("params"), py::arg("kappa0_positive") = false);

  py::class_<SpectralField>(m, "SpectralField")
      .def_property_readonly("time", &SpectralField::time)
      .def_property_readonly("dim", &SpectralField::dim)
      .def("advance", &SpectralField::advance, py::arg("dt"))
      .def("increment", [](const SpectralField& f, const std::vector<double>& x) {
        return to_dense(f.eval_increment(to_vec(x)));
      })
      .def("incompressibility_residual", &SpectralField::incompressibility_residual);
  m.def(
      "synthesize",
      [](const SpectrumParams& p, int n_modes, std::uint64_t seed, std::uint64_t realization) {
        SynthesisOptions o;
        o.realization = realization;
        return synthesize(p, n_modes, seed, o);
      },
      py::arg("params"), py::arg("n_modes"), py::arg("seed"), py::arg("realization") = 0);

  py::class_<KraichnanOracle>(m, "KraichnanOracle")
      .def(py::init<const SpectrumParams&, double>(), py::arg("params"), py::arg("kappa0") = 0.0)
      .def_property_readonly("eta", &KraichnanOracle::eta)
      .def("gamma1", [](const KraichnanOracle& o, const std::vector<double>& x,
                        const std::vector<double>& y) { return to_dense(o.gamma1(to_vec(x), to_vec(y))); })
      .def("gamma1_closed",
           [](const KraichnanOracle& o, const std::vector<double>& x) { return to_dense(o.gamma1_closed(to_vec(x))); })
      .def("diffusion",
           [](const KraichnanOracle& o, const std::vector<double>& x) { return to_dense(o.diffusion(to_vec(x))); });

  m.def(
      "simulate_pairs",
      [](const SpectrumParams& p, const std::vector<double>& x0, double kappa, std::size_t n_pairs,
         std::uint64_t seed, std::vector<double> times, double dt, int n_modes, unsigned threads) {
        PairSimOptions o;
        o.sample_times = std::move(times);
        o.dt = dt;
        o.n_modes = n_modes;
        o.threads = threads;
        PairEnsemble e;
        {
          py::gil_scoped_release release;
          e = simulate_pairs(p, to_vec(x0), kappa, n_pairs, seed, o);
        }
        return py::make_tuple(e.times, positions(e), series_dict(msd(e)));
      },
      py::arg("params"), py::arg("x0"), py::arg("kappa"), py::arg("n_pairs"), py::arg("seed"),
      py::arg("times"), py::arg("dt"), py::arg("n_modes") = 256, py::arg("threads") = 1,
      "Colored-field pair ensemble: (times, positions[pair, time, dim], msd).");
  m.def(
      "simulate_limit_pairs",
      [](const KraichnanOracle& oracle, const std::vector<double>& x0, std::size_t n_pairs,
         std::uint64_t seed, std::vector<double> times, unsigned threads) {
        LimitSimOptions o;
        o.sample_times = std::move(times);
        o.threads = threads;
        PairEnsemble e;
        {
          py::gil_scoped_release release;
          e = simulate_limit_pairs(oracle, to_vec(x0), n_pairs, seed, o);
        }
        return py::make_tuple(e.times, positions(e), series_dict(msd(e)));
      },
      py::arg("oracle"), py::arg("x0"), py::arg("n_pairs"), py::arg("seed"), py::arg("times"),
      py::arg("threads") = 1);

  m.def(
      "fit_power_law",
      [](const std::vector<double>& t, const std::vector<double>& y, double lo, double hi,
         const std::vector<double>& se) {
        const auto f = fit_power_law(series_from(t, y, se), {lo, hi});
        py::dict d;
        d["exponent"] = f.exponent;
        d["prefactor"] = f.prefactor;
        d["ci_half_width"] = f.ci_half_width;
        d["n_points"] = f.n_points;
        return d;
      },
      py::arg("t"), py::arg("y"), py::arg("lo"), py::arg("hi"), py::arg("se") = std::vector<double>{});

  m.def("presets", [] {
    std::vector<std::string> names;
    for (Preset p : all_presets()) names.push_back(to_string(p));
    return names;
  });
  m.def("preset_ini", [](const std::string& name) { return preset_ini(preset_from_string(name)); });
  m.def("validate_json", [](const std::string& ini) { return validate_config(parse_config(ini)).json().dump(); });
  m.def(
      "run_json",
      [](const std::string& ini, const std::filesystem::path& out_dir, unsigned threads, bool gnuplot) {
        const RunConfig c = parse_config(ini);
        RunOptions o;
        o.out_dir = out_dir;
        o.threads = threads;
        o.gnuplot = gnuplot;
        py::gil_scoped_release release;
        return run(c, o).json.dump();
      },
      py::arg("ini"), py::arg("out_dir"), py::arg("threads") = 0, py::arg("gnuplot") = false);
  m.attr("__version__") = tool_version();
}
