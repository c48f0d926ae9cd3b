#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace turbdisp {

// Spatial vectors and tensors live in d = 2 or 3; the fixed maximum keeps
// them on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

/// Raised when a model parameter leaves its admissible domain.
class ParameterError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The requested time step does not resolve the fastest retained mode.
class StabilityError : public std::invalid_argument {
 public:
  StabilityError(const std::string& what, double bound)
      : std::invalid_argument(what), bound_(bound) {}
  double max_dt() const noexcept { return bound_; }

 private:
  double bound_;
};

/// Matrix square root of a diffusion tensor failed even after jitter.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frequency band (k_min, k_max) of retained wavenumbers.
struct Band {
  double k_min = 0.0;
  double k_max = 0.0;

  bool contains(double k) const noexcept { return k > k_min && k < k_max; }
};

}  // namespace turbdisp
