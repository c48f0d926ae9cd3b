#include "turbdisp/config.hpp"
#include "turbdisp/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace turbdisp;

namespace {

enum Exit : int { Ok = 0, Failed = 1, BadInput = 2, Refused = 3 };

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
};

// A run record replays through its embedded config.
std::string read_config_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("config_ini"))
      throw ConfigError("'" + path + "' is not a run record");
    return j["config_ini"].get<std::string>();
  }
  return text;
}

RunConfig resolve(const Common& c) {
  if (c.config_path.empty() && c.preset.empty())
    throw ConfigError("give --config PATH or --preset NAME");
  RunConfig cfg = c.config_path.empty() ? parse_config(preset_ini(preset_from_string(c.preset)))
                                        : parse_config(read_config_text(c.config_path));
  if (!c.config_path.empty() && !c.preset.empty()) cfg.preset = preset_from_string(c.preset);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "INI config, or a run record to replay");
  app->add_option("--preset", c.preset, "built-in preset (overrides the config's preset)");
  app->add_option("--seed", c.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pair dispersion and passive scalar experiments in synthetic turbulence"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Common run_opts, val_opts;
  std::string out_dir = ".";
  unsigned threads = 0;
  bool no_gnuplot = false;
  auto* run_cmd = app.add_subcommand("run", "execute a preset and write tables plus a run record");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--threads", threads, "worker threads (0: hardware)");
  run_cmd->add_flag("--no-gnuplot", no_gnuplot, "skip gnuplot scripts");

  auto* val_cmd = app.add_subcommand("validate", "regime report and constraint audit, no execution");
  add_common(val_cmd, val_opts);
  bool as_json = false;
  val_cmd->add_flag("--json", as_json, "print the report as JSON");

  std::string show;
  auto* pre_cmd = app.add_subcommand("presets", "list presets or print one as INI");
  pre_cmd->add_option("--preset", show, "print this preset's config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre_cmd) {
      if (!show.empty()) {
        std::cout << preset_ini(preset_from_string(show));
        return Ok;
      }
      for (Preset p : all_presets()) std::cout << to_string(p) << "\t" << preset_summary(p) << "\n";
      return Ok;
    }
    if (*val_cmd) {
      const ValidationReport rep = validate_config(resolve(val_opts));
      if (as_json) std::cout << rep.json().dump(2) << "\n";
      else std::cout << rep.text();
      return rep.audit && !rep.audit->pass ? Failed : Ok;
    }
    const RunConfig cfg = resolve(run_opts);
    RunOptions ro;
    ro.out_dir = out_dir;
    ro.threads = threads;
    ro.gnuplot = !no_gnuplot;
    const RunRecord rec = run(cfg, ro);
    for (const auto& a : rec.assertions)
      std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
    std::cout << "record: " << (ro.out_dir / "run_record.json").string() << "\n";
    if (!rec.success()) {
      std::cerr << rec.failure_summary();
      return Failed;
    }
    return Ok;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return BadInput;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return BadInput;
  } catch (const ConstraintViolation& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return Refused;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Failed;
  }
}
