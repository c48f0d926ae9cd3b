#pragma once

#include "turbdisp/types.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

namespace turbdisp {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|, the scale the tolerance refers to
};

/// Adaptive Gauss-Kronrod (21 points) on [a, b]. Throws QuadratureError when
/// the error estimate exceeds rel_tol * L1 + abs_tol.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol,
                     double abs_tol = 0.0, unsigned max_depth = 22) {
  QuadResult r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, max_depth, rel_tol, &r.error, &r.l1);
  if (!std::isfinite(r.value) || r.error > rel_tol * r.l1 + abs_tol) {
    const double achieved = r.l1 > 0.0 ? r.error / r.l1 : r.error;
    throw QuadratureError("adaptive quadrature did not converge on [" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              "]: achieved relative error " + std::to_string(achieved),
                          achieved);
  }
  return r;
}

}  // namespace turbdisp
