#include "turbdisp/params.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace turbdisp {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool near(double a, double b) { return std::abs(a - b) <= kRegimeTolerance; }

}  // namespace

void validate(const SpectrumParams& p) {
  require(std::isfinite(p.alpha) && p.alpha > 1.0 && p.alpha < 2.0,
          "alpha must satisfy 1 < alpha < 2 (got " + fmt_num(p.alpha) + ")");
  require(std::isfinite(p.beta) && p.beta > 0.0,
          "beta must satisfy beta > 0 (got " + fmt_num(p.beta) + ")");
  require(std::isfinite(p.e0) && p.e0 >= 0.0,
          "e0 must be non-negative (got " + fmt_num(p.e0) + ")");
  require(std::isfinite(p.a) && p.a > 0.0,
          "a must satisfy a > 0 (got " + fmt_num(p.a) + ")");
  require(std::isfinite(p.ell1) && p.ell1 > 0.0,
          "ell1 must satisfy ell1 > 0 (got " + fmt_num(p.ell1) + ")");
  require(std::isfinite(p.ell0) && p.ell1 < p.ell0,
          "empty inertial band: ell1 < ell0 required (ell1 = " +
              fmt_num(p.ell1) + ", ell0 = " + fmt_num(p.ell0) + ")");
  require(p.dim == 2 || p.dim == 3,
          "dim must be 2 or 3 (got " + std::to_string(p.dim) + ")");
}

SpectrumParams make_params_direct(double alpha, double beta, double e0,
                                  double a, double ell0, double ell1, int dim) {
  SpectrumParams p{alpha, beta, e0, a, ell0, ell1, dim};
  validate(p);
  return p;
}

SpectrumParams make_params(double alpha, double beta, double u0, double c0,
                           double ell0, double ell1, int dim) {
  require(std::isfinite(u0) && u0 > 0.0,
          "u0 must satisfy u0 > 0 (got " + fmt_num(u0) + ")");
  require(std::isfinite(c0) && c0 > 0.0,
          "c0 must satisfy c0 > 0 (got " + fmt_num(c0) + ")");
  // Validate the shape parameters before C_alpha touches them.
  validate(SpectrumParams{alpha, beta, 1.0, 1.0, ell0, ell1, dim});
  const double e0 = c_alpha(alpha, dim) * u0 * u0 * std::pow(ell0, 2.0 - 2.0 * alpha);
  const double a = c0 * std::pow(ell0, 2.0 * beta - 1.0) * u0;
  return make_params_direct(alpha, beta, e0, a, ell0, ell1, dim);
}

double lanczos_gamma(double x) {
  static constexpr std::array<double, 9> kCoef = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  if (!std::isfinite(x)) throw ParameterError("gamma: non-finite argument");
  if (x <= 0.0 && x == std::floor(x))
    throw ParameterError("gamma: pole at non-positive integer " + fmt_num(x));
  if (x < 0.5) {
    const double pi = std::numbers::pi;
    return pi / (std::sin(pi * x) * lanczos_gamma(1.0 - x));
  }
  const double z = x - 1.0;
  double sum = kCoef[0];
  for (std::size_t i = 1; i < kCoef.size(); ++i) sum += kCoef[i] / (z + static_cast<double>(i));
  const double t = z + kG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * sum;
}

double c_alpha(double alpha, int dim) {
  if (dim != 2 && dim != 3)
    throw ParameterError("c_alpha: dim must be 2 or 3 (got " + std::to_string(dim) + ")");
  if (!(alpha < 2.0))
    throw ParameterError("c_alpha: Gamma(2 - alpha) has a pole at alpha >= 2 (got " +
                         fmt_num(alpha) + ")");
  if (!(alpha > 1.0))
    throw ParameterError("c_alpha: alpha must exceed 1 (got " + fmt_num(alpha) + ")");
  const double d = dim;
  const double pi = std::numbers::pi;
  return std::pow(4.0 * pi, d / 2.0) * std::pow(2.0, 2.0 * alpha - 3.0) *
         (2.0 * alpha - 2.0) * lanczos_gamma(alpha + d / 2.0) /
         ((d - 1.0) * lanczos_gamma(2.0 - alpha));
}

ScalingExponents exponents(const SpectrumParams& p) {
  validate(p);
  const double s2 = p.alpha + 2.0 * p.beta;
  const double s1 = p.alpha + p.beta;
  ScalingExponents ex;
  if (s2 > 2.0 + kRegimeTolerance) {
    ex.q = 2.0 - s1;
    ex.eta = s1 - 1.0;
    if (ex.q > 0.0) ex.p = 1.0 / ex.q;
    if (s1 < 2.0 && s2 < 3.0) {
      ex.nu = (4.0 - s2) / (3.0 - s2);
    }
    if (s1 < 2.0) {
      ex.gamma_kappa0_zero = (3.0 - s2) / (4.0 - s2);
      ex.gamma_kappa0_positive = (4.0 - s2) / (6.0 - s2);
    }
  } else {
    // On the boundary q = beta = 1 - alpha/2; below it the frozen scaling
    // 2q + alpha - 2 = 0 gives the same formula.
    ex.q = 1.0 - p.alpha / 2.0;
    ex.p = 2.0 / (2.0 - p.alpha);
    ex.eta = p.alpha / 2.0;
  }
  return ex;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::WhiteNoiseI: return "white-noise (i)";
    case Regime::WhiteNoiseII: return "white-noise (ii)";
    case Regime::WhiteNoiseIII: return "white-noise (iii)";
    case Regime::WhiteNoiseIV: return "white-noise (iv)";
    case Regime::WhiteNoiseV: return "white-noise (v)";
    case Regime::Boundary: return "boundary";
    case Regime::Frozen: return "frozen";
  }
  return "unknown";
}

double RateMonomial::evaluate(double eps, double k_cut, double l_outer,
                              double kappa_tilde) const {
  double v = std::pow(eps, eps_power) * std::pow(k_cut, k_power) *
             std::pow(l_outer, l_power);
  if (kappa_power != 0.0) v *= std::pow(kappa_tilde, kappa_power);
  if (log_k_power != 0.0) v *= std::pow(std::log(k_cut), log_k_power);
  return v;
}

std::string RateMonomial::expression() const {
  std::ostringstream os;
  os.precision(6);
  auto term = [&](const char* sym, double pw) {
    if (pw == 0.0) return;
    if (os.tellp() > 0) os << "*";
    os << sym;
    if (pw != 1.0) os << "^" << pw;
  };
  term("kappa~", kappa_power);
  term("eps", eps_power);
  term("K", k_power);
  term("L", l_power);
  if (log_k_power != 0.0) {
    if (os.tellp() > 0) os << "*";
    os << "log(K)^" << log_k_power;
  }
  return os.str();
}

RegimeReport classify_regime(const SpectrumParams& p, bool kappa0_positive,
                             LimitOptions opts) {
  validate(p);
  const double s2 = p.alpha + 2.0 * p.beta;
  const double s1 = p.alpha + p.beta;
  RegimeReport rep;
  rep.kolmogorov = near(s2, 2.0) && near(p.alpha - p.beta, 1.0);
  rep.l_limit_admissible = s1 < 2.0 && s2 > 2.0 + kRegimeTolerance;

  if (near(s2, 2.0)) {
    rep.regime = Regime::Boundary;
  } else if (s2 < 2.0) {
    rep.regime = Regime::Frozen;
  } else if (near(s2, 4.0)) {
    rep.regime = Regime::WhiteNoiseII;
  } else if (s2 > 4.0) {
    rep.regime = Regime::WhiteNoiseI;
  } else if (near(s2, 3.0)) {
    rep.regime = Regime::WhiteNoiseIV;
  } else if (s2 > 3.0) {
    rep.regime = Regime::WhiteNoiseIII;
  } else {
    rep.regime = Regime::WhiteNoiseV;
  }
  if (rep.regime == Regime::Boundary || rep.regime == Regime::Frozen) return rep;

  auto add = [&](std::string src, double e, double k, double l, double kap,
                 double lg) {
    rep.constraints.push_back(RateMonomial{std::move(src), e, k, l, kap, lg});
  };

  if (opts.kappa_tilde_zero) {
    // Pure transport with kappa~ = 0.
    if (s2 > 3.0 + kRegimeTolerance) {
    } else if (rep.regime == Regime::WhiteNoiseIV) {
      add("zero-diffusivity closure (ii)", 1.0, 0.0, 0.0, 0.0, 0.5);
    } else {
      add("zero-diffusivity closure (iii)", 1.0, 3.0 - s2, 0.0, 0.0, 0.0);
    }
  } else {
    switch (rep.regime) {
      case Regime::WhiteNoiseI: break;
      case Regime::WhiteNoiseII:
        add("diffusive closure (ii)", 2.0, 0.0, 0.0, 1.0, 0.5);
        break;
      case Regime::WhiteNoiseIII:
        add("diffusive closure (iii)", 2.0, 4.0 - s2, 0.0, 1.0, 0.0);
        break;
      case Regime::WhiteNoiseIV:
        add("diffusive closure (iv)", 2.0, 1.0, 0.0, 1.0, 0.0);
        add("diffusive closure (iv)", 1.0, 0.0, 0.0, 0.0, 0.5);
        break;
      case Regime::WhiteNoiseV:
        add("diffusive closure (v)", 2.0, 4.0 - s2, 0.0, 1.0, 0.0);
        add("diffusive closure (v)", 1.0, 3.0 - s2, 0.0, 0.0, 0.0);
        break;
      default: break;
    }
    if (kappa0_positive) {
      // Strong convergence with positive dissipation.
      if (rep.regime == Regime::WhiteNoiseII) {
        add("molecular diffusivity (ii)", 2.0, 0.0, 0.0, 0.0, 0.5);
      } else if (s2 < 4.0) {
        add("molecular diffusivity (iii)", 2.0, 4.0 - s2, 0.0, 0.0, 0.0);
      }
    }
  }
  if (opts.l_to_infinity) {
    add("unbounded outer scale", 1.0, 0.0, 2.0 * (s2 - 2.0), 0.0, 0.0);
  }
  return rep;
}

double reynolds_ratio(double alpha, double re) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw ParameterError("reynolds_ratio: alpha must satisfy 1 < alpha < 2 (got " +
                         fmt_num(alpha) + ")");
  if (!(re >= 1.0))
    throw ParameterError("reynolds_ratio: Re must be at least 1 (got " + fmt_num(re) + ")");
  return std::pow(re, 1.0 / (4.0 - 2.0 * alpha));
}

Mat energy_spectrum(const SpectrumParams& p, const Vec& k) {
  return energy_spectrum(p, k, p.band());
}

Mat energy_spectrum(const SpectrumParams& p, const Vec& k, Band band) {
  if (k.size() != p.dim)
    throw ParameterError("energy_spectrum: wavevector dimension mismatch");
  const double kn = k.norm();
  if (!(kn > 0.0)) throw ParameterError("energy_spectrum: k = 0 is outside the domain");
  Mat out = Mat::Zero(p.dim, p.dim);
  if (!band.contains(kn)) return out;
  const Vec kh = k / kn;
  out = Mat::Identity(p.dim, p.dim) - kh * kh.transpose();
  return out * (p.e0 * std::pow(kn, 1.0 - 2.0 * p.alpha));
}

}  // namespace turbdisp
