#include "turbdisp/ensemble.hpp"

#include <cmath>

namespace turbdisp {

std::vector<double> log_time_grid(double t_min, double t_max, std::size_t n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2)
    throw ParameterError("log_time_grid: need 0 < t_min < t_max and n >= 2");
  std::vector<double> t{0.0};
  const double ratio = std::log(t_max / t_min);
  for (std::size_t i = 0; i < n; ++i)
    t.push_back(i + 1 == n ? t_max : t_min * std::exp(ratio * static_cast<double>(i) / (n - 1)));
  return t;
}

std::vector<double> uniform_time_grid(double t_end, std::size_t n) {
  if (!(t_end > 0.0) || n < 1) throw ParameterError("uniform_time_grid: need t_end > 0 and n >= 1");
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = t_end * static_cast<double>(i) / static_cast<double>(n);
  t[n] = t_end;
  return t;
}

}  // namespace turbdisp
