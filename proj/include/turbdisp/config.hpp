#pragma once

#include "turbdisp/params.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace turbdisp {

/// Malformed or inconsistent configuration, with its position (1-based; 0
/// when the problem is not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

enum class Preset { Structure, Richardson, FourThirds, KraichnanLimit, Dissipation, Boundary };

std::string to_string(Preset p);
Preset preset_from_string(std::string_view name);
const std::vector<Preset>& all_presets();
std::string preset_summary(Preset p);

/// K(eps) = value eps^(-eps_power).
struct Schedule {
  double value = 1.0;
  double eps_power = 0.0;
  double at(double eps) const;
};

struct SweepBlock {
  std::vector<double> epsilons;  // strictly decreasing
  Schedule k_cut{};
  Schedule l_outer{};
  Schedule kappa_tilde{};
  bool l_to_infinity = false;
  double threshold = 0.1;
  int n_modes = 128;
  std::size_t n_pairs = 500;
  std::size_t oracle_pairs = 2000;
  double dt_max = 0.0;  // 0: t_max / 2000
};

struct ObserveBlock {
  double r0 = 1.0;
  double t_min = 0.01;
  double t_max = 10.0;
  std::size_t n_times = 60;
  double fit_t_min = 0.1;
  double fit_t_max = 10.0;
  double r_bin_min = 0.01;
  double r_bin_max = 1.0;
  std::size_t n_bins = 8;
  double fit_r_min = 0.01;
  double fit_r_max = 1.0;
  double lag_fraction = 0.2;         // diffusivity lag cap
  double control_kappa = 0.5;        // E0 = 0 control run
  double dt = 0.0;                   // 0: automatic
  double exponent_tolerance = 0.1;   // relative; 0 disables the check
};

struct StructureBlock {
  std::vector<double> separations;
  std::vector<double> lags;
  std::size_t realizations = 2000;
  std::vector<double> mode_lags;     // OU autocorrelation lags
  std::size_t probe_modes = 4;
};

struct ScalarBlock {
  std::string profile = "gaussian";  // gaussian | cosine | indicator
  std::vector<double> center;        // defaults to the origin
  double width = 0.2;
  double grid_half_width = 1.0;
  int grid_cells = 32;
  std::vector<double> times;
  double kappa_tilde = 0.02;
  std::size_t mc_paths = 32;
  std::string transport = "colored";  // colored | white
  double dt = 5e-3;
  double epsilon = 1.0;
  double band_min = 1.0;
  double band_max = 20.0;
  bool control_pure_transport = true;
  int control_grid_cells = 100;
  double control_time = 0.5;
};

struct RunConfig {
  Preset preset = Preset::Richardson;
  std::uint64_t seed = 1;
  std::string model = "kraichnan";   // kraichnan | colored
  std::size_t n_pairs = 10000;
  int n_modes = 256;
  SpectrumParams params{};
  double kappa0 = 0.0;
  bool has_band = false;             // kraichnan model: finite (1/ell0, 1/ell1) band
  double epsilon = 1.0;              // colored model rescaling
  ObserveBlock observe{};
  std::optional<SweepBlock> sweep;
  StructureBlock structure{};
  ScalarBlock scalar{};
};

/// Parses INI text. Unknown sections or keys, malformed values and out-of-
/// range parameters raise ConfigError with the offending position.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Fully resolved config as INI text; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& c);

/// Built-in configuration of a preset.
std::string preset_ini(Preset p);

}  // namespace turbdisp
