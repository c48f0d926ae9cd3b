#pragma once

#include "turbdisp/config.hpp"
#include "turbdisp/params.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace turbdisp {

/// The epsilon schedule leaves a constraint monomial above the threshold.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConstraintEntry {
  RateMonomial monomial;
  std::vector<double> values;  // one per epsilon
  double at_smallest = 0.0;
  bool pass = false;
};

struct ConstraintAudit {
  double threshold = 0.1;
  std::vector<double> epsilons;
  std::vector<ConstraintEntry> entries;
  bool pass = true;
};

struct ValidationReport {
  RunConfig config;
  RegimeReport regime;
  ScalingExponents exponents;
  std::optional<ConstraintAudit> audit;  // only with an epsilon sweep

  std::string text() const;
  nlohmann::ordered_json json() const;
};

/// Regime class, exponents and the constraint audit. Touches no files.
ValidationReport validate_config(const RunConfig& config);

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;  // 0: hardware concurrency
  bool gnuplot = true;
};

struct RunRecord {
  nlohmann::ordered_json json;
  std::vector<Assertion> assertions;
  std::vector<std::string> files;  // relative to out_dir

  bool success() const;
  std::string failure_summary() const;
};

/// Runs the preset, writes its CSV tables (and gnuplot scripts) plus
/// run_record.json into out_dir. Throws ConstraintViolation before any work
/// when the sweep fails its audit.
RunRecord run(const RunConfig& config, const RunOptions& options);

/// Sub-seed for (experiment, item, role) under one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

std::string tool_version();

}  // namespace turbdisp
