#include "turbdisp/config.hpp"

#include "turbdisp/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace turbdisp {

namespace pt = boost::property_tree;

ConfigError::ConfigError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ": " + what
                                  : what),
      line_(line),
      column_(column) {}

namespace {

const std::vector<std::pair<Preset, std::string>>& preset_names() {
  static const std::vector<std::pair<Preset, std::string>> names = {
      {Preset::Structure, "structure"},           {Preset::Richardson, "richardson"},
      {Preset::FourThirds, "four-thirds"},        {Preset::KraichnanLimit, "kraichnan-limit"},
      {Preset::Dissipation, "dissipation"},       {Preset::Boundary, "boundary"}};
  return names;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Position {
  int line = 0;
  int column = 0;
};

// Where each section header and each value starts.
std::map<std::string, Position> locate(std::string_view text) {
  std::map<std::string, Position> pos;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != ';' && line[first] != '#') {
      if (line[first] == '[') {
        section = trim(line.substr(first + 1, line.find(']') - first - 1));
        pos.emplace(section, Position{line_no, static_cast<int>(first) + 1});
      } else if (const auto eq = line.find('='); eq != std::string_view::npos) {
        const auto vfirst = line.find_first_not_of(" \t", eq + 1);
        const int col = static_cast<int>(vfirst == std::string_view::npos ? eq + 1 : vfirst) + 1;
        pos.emplace(section + "." + trim(line.substr(0, eq)), Position{line_no, col});
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return pos;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, Position> pos)
      : tree_(tree), pos_(std::move(pos)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = pos_.find(key);
    const Position p = it == pos_.end() ? Position{} : it->second;
    throw ConfigError(key + ": " + what, p.line, p.column);
  }

  bool has_section(const std::string& s) const { return tree_.get_child_optional(s).has_value(); }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  double number(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? parse_number(key, *v) : fallback;
  }
  std::optional<double> maybe_number(const std::string& key) {
    const auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_number(key, *v);
  }
  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }
  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 0.0)) fail(key, "must be non-negative");
    return v;
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) {
    const auto v = raw(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
      fail(key, "expected a non-negative integer, got '" + *v + "'");
    if (out < min) fail(key, "must be at least " + std::to_string(min));
    return out;
  }
  bool boolean(const std::string& key, bool fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    fail(key, "expected true or false, got '" + *v + "'");
  }
  std::string word(const std::string& key, const std::string& fallback,
                   std::initializer_list<const char*> allowed) {
    const auto v = raw(key);
    if (!v) return fallback;
    for (const char* a : allowed)
      if (*v == a) return *v;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    fail(key, "expected one of " + list + ", got '" + *v + "'");
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= v->size()) {
      const auto end = std::min(v->find(',', start), v->size());
      out.push_back(parse_number(key, trim(std::string_view(*v).substr(start, end - start))));
      if (end == v->size()) break;
      start = end + 1;
    }
    return out;
  }

  // Any key that no reader asked for is a typo or a stale option.
  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) fail(section, "key outside a section");
      bool known_section = false;
      for (const char* s : {"run", "params", "observe", "sweep", "structure", "scalar"})
        known_section = known_section || section == s;
      if (!known_section) fail(section, "unknown section");
      for (const auto& [key, _] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) fail(full, "unknown key");
      }
    }
  }

 private:
  double parse_number(const std::string& key, const std::string& s) const {
    double out = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(out))
      fail(key, "expected a finite number, got '" + s + "'");
    return out;
  }

  const pt::ptree& tree_;
  std::map<std::string, Position> pos_;
  std::set<std::string> used_;
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s;
}

}  // namespace

std::string to_string(Preset p) {
  for (const auto& [k, n] : preset_names())
    if (k == p) return n;
  return "unknown";
}

Preset preset_from_string(std::string_view name) {
  for (const auto& [k, n] : preset_names())
    if (n == name) return k;
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> v = [] {
    std::vector<Preset> out;
    for (const auto& [k, n] : preset_names()) out.push_back(k);
    return out;
  }();
  return v;
}

std::string preset_summary(Preset p) {
  switch (p) {
    case Preset::Structure:
      return "synthetic field structure tensor and mode autocorrelation against closed forms";
    case Preset::Richardson: return "mean square pair separation and its power-law exponent";
    case Preset::FourThirds: return "scale-dependent relative diffusivity and its slope";
    case Preset::KraichnanLimit:
      return "colored-noise epsilon sweep against the white-noise limit oracle";
    case Preset::Dissipation: return "passive scalar energy, maximum principle and pure transport";
    case Preset::Boundary: return "boundary-class rescaling and its time exponent";
  }
  return {};
}

double Schedule::at(double eps) const { return value * std::pow(eps, -eps_power); }

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  {
    std::istringstream is{std::string(text)};
    try {
      pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(e.message(), static_cast<int>(e.line()), 1);
    }
  }
  Reader r(tree, locate(text));
  RunConfig c;

  const auto preset = r.raw("run.preset");
  if (!preset) throw ConfigError("run.preset is required");
  try {
    c.preset = preset_from_string(*preset);
  } catch (const ConfigError& e) {
    r.fail("run.preset", e.what());
  }
  c.seed = r.integer("run.seed", c.seed);
  c.model = r.word("run.model", c.model, {"kraichnan", "colored"});
  c.n_pairs = r.integer("run.n_pairs", c.n_pairs, 2);
  c.n_modes = static_cast<int>(r.integer("run.n_modes", static_cast<std::uint64_t>(c.n_modes), 1));
  c.epsilon = r.positive("run.epsilon", c.epsilon);

  const double alpha = r.number("params.alpha", c.params.alpha);
  const double beta = r.number("params.beta", c.params.beta);
  const int dim = static_cast<int>(r.integer("params.dim", 2));
  const double ell0 = r.number("params.ell0_length", c.params.ell0);
  const double ell1 = r.number("params.ell1_length", c.params.ell1);
  const auto e0 = r.maybe_number("params.e0_amplitude");
  const auto a = r.maybe_number("params.a_rate");
  const auto u0 = r.maybe_number("params.u0_velocity");
  const auto c0 = r.maybe_number("params.c0_rate_constant");
  if (u0 && (e0 || a)) r.fail("params.u0_velocity", "give either u0/c0 or e0/a, not both");
  if (c0 && !u0) r.fail("params.c0_rate_constant", "needs u0_velocity");
  c.params = u0 ? make_params(alpha, beta, *u0, c0.value_or(1.0), ell0, ell1, dim)
                : make_params_direct(alpha, beta, e0.value_or(1.0), a.value_or(1.0), ell0, ell1, dim);
  c.kappa0 = r.non_negative("params.kappa0_diffusivity", 0.0);
  c.has_band = r.boolean("params.finite_band", false);

  auto& o = c.observe;
  o.r0 = r.positive("observe.r0_length", o.r0);
  o.t_min = r.positive("observe.t_min_time", o.t_min);
  o.t_max = r.positive("observe.t_max_time", o.t_max);
  o.n_times = r.integer("observe.n_times", o.n_times, 2);
  o.fit_t_min = r.positive("observe.fit_t_min_time", o.fit_t_min);
  o.fit_t_max = r.positive("observe.fit_t_max_time", o.fit_t_max);
  o.r_bin_min = r.positive("observe.r_bin_min_length", o.r_bin_min);
  o.r_bin_max = r.positive("observe.r_bin_max_length", o.r_bin_max);
  o.n_bins = r.integer("observe.n_bins", o.n_bins, 1);
  o.fit_r_min = r.positive("observe.fit_r_min_length", o.fit_r_min);
  o.fit_r_max = r.positive("observe.fit_r_max_length", o.fit_r_max);
  o.lag_fraction = r.positive("observe.lag_fraction", o.lag_fraction);
  o.control_kappa = r.positive("observe.control_kappa_diffusivity", o.control_kappa);
  o.dt = r.non_negative("observe.dt_time", o.dt);
  o.exponent_tolerance = r.non_negative("observe.exponent_tolerance", o.exponent_tolerance);
  if (!(o.t_max > o.t_min)) r.fail("observe.t_max_time", "must exceed t_min_time");
  if (!(o.fit_t_max > o.fit_t_min)) r.fail("observe.fit_t_max_time", "must exceed fit_t_min_time");
  if (!(o.r_bin_max > o.r_bin_min)) r.fail("observe.r_bin_max_length", "must exceed r_bin_min_length");

  if (r.has_section("sweep")) {
    SweepBlock s;
    s.epsilons = r.list("sweep.epsilons", {0.4, 0.2, 0.1});
    if (s.epsilons.size() < 2) r.fail("sweep.epsilons", "need at least two values");
    for (std::size_t i = 0; i < s.epsilons.size(); ++i) {
      if (!(s.epsilons[i] > 0.0 && s.epsilons[i] <= 1.0))
        r.fail("sweep.epsilons", "values must lie in (0, 1]");
      if (i && !(s.epsilons[i] < s.epsilons[i - 1]))
        r.fail("sweep.epsilons", "values must be strictly decreasing");
    }
    s.k_cut = {r.positive("sweep.k_cut_wavenumber", 1.0), r.number("sweep.k_cut_eps_power", 0.0)};
    s.l_outer = {r.positive("sweep.l_outer_length", 1.0), r.number("sweep.l_outer_eps_power", 0.0)};
    s.kappa_tilde = {r.non_negative("sweep.kappa_tilde_diffusivity", 0.0),
                     r.number("sweep.kappa_tilde_eps_power", 0.0)};
    if (s.kappa_tilde.eps_power > 0.0)
      r.fail("sweep.kappa_tilde_eps_power", "must be <= 0 so the diffusivity has a limit");
    s.l_to_infinity = r.boolean("sweep.l_to_infinity", false);
    if (s.l_to_infinity && !(s.l_outer.eps_power > 0.0))
      r.fail("sweep.l_outer_eps_power", "l_to_infinity needs a positive power");
    s.threshold = r.positive("sweep.threshold", s.threshold);
    s.n_modes = static_cast<int>(r.integer("sweep.n_modes", static_cast<std::uint64_t>(s.n_modes), 1));
    s.n_pairs = r.integer("sweep.n_pairs", s.n_pairs, 2);
    s.oracle_pairs = r.integer("sweep.oracle_pairs", s.oracle_pairs, 2);
    s.dt_max = r.non_negative("sweep.dt_max_time", s.dt_max);
    c.sweep = s;
  }

  auto& st = c.structure;
  st.separations = r.list("structure.separations_length", {0.05, 0.2, 0.5, 0.2, 0.5});
  st.lags = r.list("structure.lags_time", {0.0, 0.0, 0.0, 0.5, 0.5});
  if (st.separations.size() != st.lags.size())
    r.fail("structure.lags_time", "needs one lag per separation");
  for (double v : st.separations)
    if (!(v > 0.0)) r.fail("structure.separations_length", "values must be positive");
  for (double v : st.lags)
    if (!(v >= 0.0)) r.fail("structure.lags_time", "values must be non-negative");
  st.realizations = r.integer("structure.realizations", st.realizations, 2);
  st.mode_lags = r.list("structure.mode_lags_time", {0.1, 0.5, 1.0});
  for (double v : st.mode_lags)
    if (!(v > 0.0)) r.fail("structure.mode_lags_time", "values must be positive");
  st.probe_modes = r.integer("structure.probe_modes", st.probe_modes, 1);

  auto& sc = c.scalar;
  sc.profile = r.word("scalar.profile", sc.profile, {"gaussian", "cosine", "indicator"});
  sc.center = r.list("scalar.center_length", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  if (sc.center.size() != static_cast<std::size_t>(dim))
    r.fail("scalar.center_length", "needs one coordinate per dimension");
  sc.width = r.positive("scalar.width_length", sc.width);
  sc.grid_half_width = r.positive("scalar.grid_half_width_length", sc.grid_half_width);
  sc.grid_cells = static_cast<int>(r.integer("scalar.grid_cells", static_cast<std::uint64_t>(sc.grid_cells), 2));
  sc.times = r.list("scalar.times_time", {0.1, 0.3, 0.6});
  for (std::size_t i = 0; i < sc.times.size(); ++i)
    if (!(sc.times[i] > 0.0) || (i && !(sc.times[i] > sc.times[i - 1])))
      r.fail("scalar.times_time", "values must be positive and increasing");
  sc.kappa_tilde = r.non_negative("scalar.kappa_tilde_diffusivity", sc.kappa_tilde);
  sc.mc_paths = r.integer("scalar.mc_paths", sc.mc_paths, 2);
  sc.transport = r.word("scalar.transport", sc.transport, {"colored", "white"});
  sc.dt = r.positive("scalar.dt_time", sc.dt);
  sc.epsilon = r.positive("scalar.epsilon", sc.epsilon);
  sc.band_min = r.positive("scalar.band_min_wavenumber", sc.band_min);
  sc.band_max = r.positive("scalar.band_max_wavenumber", sc.band_max);
  if (!(sc.band_max > sc.band_min)) r.fail("scalar.band_max_wavenumber", "must exceed band_min_wavenumber");
  sc.control_pure_transport = r.boolean("scalar.control_pure_transport", sc.control_pure_transport);
  sc.control_grid_cells =
      static_cast<int>(r.integer("scalar.control_grid_cells", static_cast<std::uint64_t>(sc.control_grid_cells), 2));
  sc.control_time = r.positive("scalar.control_time", sc.control_time);

  r.reject_unknown();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  const auto& p = c.params;
  const auto& o = c.observe;
  os << "[run]\n"
     << "preset = " << to_string(c.preset) << "\n"
     << "seed = " << c.seed << "\n"
     << "model = " << c.model << "\n"
     << "n_pairs = " << c.n_pairs << "\n"
     << "n_modes = " << c.n_modes << "\n"
     << "epsilon = " << format_number(c.epsilon) << "\n\n"
     << "[params]\n"
     << "alpha = " << format_number(p.alpha) << "\n"
     << "beta = " << format_number(p.beta) << "\n"
     << "dim = " << p.dim << "\n"
     << "e0_amplitude = " << format_number(p.e0) << "\n"
     << "a_rate = " << format_number(p.a) << "\n"
     << "ell0_length = " << format_number(p.ell0) << "\n"
     << "ell1_length = " << format_number(p.ell1) << "\n"
     << "kappa0_diffusivity = " << format_number(c.kappa0) << "\n"
     << "finite_band = " << (c.has_band ? "true" : "false") << "\n\n"
     << "[observe]\n"
     << "r0_length = " << format_number(o.r0) << "\n"
     << "t_min_time = " << format_number(o.t_min) << "\n"
     << "t_max_time = " << format_number(o.t_max) << "\n"
     << "n_times = " << o.n_times << "\n"
     << "fit_t_min_time = " << format_number(o.fit_t_min) << "\n"
     << "fit_t_max_time = " << format_number(o.fit_t_max) << "\n"
     << "r_bin_min_length = " << format_number(o.r_bin_min) << "\n"
     << "r_bin_max_length = " << format_number(o.r_bin_max) << "\n"
     << "n_bins = " << o.n_bins << "\n"
     << "fit_r_min_length = " << format_number(o.fit_r_min) << "\n"
     << "fit_r_max_length = " << format_number(o.fit_r_max) << "\n"
     << "lag_fraction = " << format_number(o.lag_fraction) << "\n"
     << "control_kappa_diffusivity = " << format_number(o.control_kappa) << "\n"
     << "dt_time = " << format_number(o.dt) << "\n"
     << "exponent_tolerance = " << format_number(o.exponent_tolerance) << "\n\n";
  if (c.sweep) {
    const auto& s = *c.sweep;
    os << "[sweep]\n"
       << "epsilons = " << join(s.epsilons) << "\n"
       << "k_cut_wavenumber = " << format_number(s.k_cut.value) << "\n"
       << "k_cut_eps_power = " << format_number(s.k_cut.eps_power) << "\n"
       << "l_outer_length = " << format_number(s.l_outer.value) << "\n"
       << "l_outer_eps_power = " << format_number(s.l_outer.eps_power) << "\n"
       << "kappa_tilde_diffusivity = " << format_number(s.kappa_tilde.value) << "\n"
       << "kappa_tilde_eps_power = " << format_number(s.kappa_tilde.eps_power) << "\n"
       << "l_to_infinity = " << (s.l_to_infinity ? "true" : "false") << "\n"
       << "threshold = " << format_number(s.threshold) << "\n"
       << "n_modes = " << s.n_modes << "\n"
       << "n_pairs = " << s.n_pairs << "\n"
       << "oracle_pairs = " << s.oracle_pairs << "\n"
       << "dt_max_time = " << format_number(s.dt_max) << "\n\n";
  }
  const auto& st = c.structure;
  os << "[structure]\n"
     << "separations_length = " << join(st.separations) << "\n"
     << "lags_time = " << join(st.lags) << "\n"
     << "realizations = " << st.realizations << "\n"
     << "mode_lags_time = " << join(st.mode_lags) << "\n"
     << "probe_modes = " << st.probe_modes << "\n\n";
  const auto& sc = c.scalar;
  os << "[scalar]\n"
     << "profile = " << sc.profile << "\n"
     << "center_length = " << join(sc.center) << "\n"
     << "width_length = " << format_number(sc.width) << "\n"
     << "grid_half_width_length = " << format_number(sc.grid_half_width) << "\n"
     << "grid_cells = " << sc.grid_cells << "\n"
     << "times_time = " << join(sc.times) << "\n"
     << "kappa_tilde_diffusivity = " << format_number(sc.kappa_tilde) << "\n"
     << "mc_paths = " << sc.mc_paths << "\n"
     << "transport = " << sc.transport << "\n"
     << "dt_time = " << format_number(sc.dt) << "\n"
     << "epsilon = " << format_number(sc.epsilon) << "\n"
     << "band_min_wavenumber = " << format_number(sc.band_min) << "\n"
     << "band_max_wavenumber = " << format_number(sc.band_max) << "\n"
     << "control_pure_transport = " << (sc.control_pure_transport ? "true" : "false") << "\n"
     << "control_grid_cells = " << sc.control_grid_cells << "\n"
     << "control_time = " << format_number(sc.control_time) << "\n";
  return os.str();
}

}  // namespace turbdisp
