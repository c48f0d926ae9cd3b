#pragma once

#include "turbdisp/ensemble.hpp"
#include "turbdisp/pairdisp.hpp"
#include "turbdisp/params.hpp"
#include "turbdisp/scalar.hpp"
#include "turbdisp/statkit.hpp"
#include "turbdisp/synthfield.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace turbdisp {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// RFC-4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

/// Rows end in CRLF.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

/// Parses RFC-4180 text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Run metadata repeated as leading columns of every table row.
struct TableMeta {
  std::string model;
  SpectrumParams params{};
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

TableMeta meta_of(const PairEnsemble& ens);

/// Columns: model, alpha, beta, e0, a, ell0, ell1, dim, kappa, seed, extras,
/// then x_name, y_name, stderr.
void write_series_csv(std::ostream& os, const Series& s, const TableMeta& meta,
                      std::string_view x_name, std::string_view y_name);

/// Metadata columns, then r_lo, r_hi, r_center, value, stderr, samples, missing.
void write_diffusivity_csv(std::ostream& os, const std::vector<DiffusivityBin>& bins,
                           const TableMeta& meta);

/// Metadata columns, then the named numeric columns.
void write_table_csv(std::ostream& os, const TableMeta& meta, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

/// t, pair_id, x0, x1[, x2].
void write_trajectories_csv(std::ostream& os, const PairEnsemble& ens);

/// x0, x1[, x2], value, stderr.
void write_scalar_csv(std::ostream& os, const std::vector<Vec>& points, const ScalarValues& v);

/// Provenance a snapshot needs to rebuild the mode set.
struct FieldOrigin {
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
  ModeLayout layout{};
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// "TDSF", version, params, band, layout, seed, realization, time, stream
/// counter, amplitude count, then the raw amplitudes (all little-endian).
void write_field_snapshot(std::ostream& os, const SpectralField& field, const FieldOrigin& origin);

/// Rebuilds the field from its origin and restores amplitudes, time and the
/// noise stream, so later advances match the original.
SpectralField read_field_snapshot(std::istream& is);

/// "TDPE", version, model, params, kappa, dt, seed, steps, pair and time
/// counts, times, positions, absorbed flags, drift (when recorded).
void write_ensemble_binary(std::ostream& os, const PairEnsemble& ens);
PairEnsemble read_ensemble_binary(std::istream& is);

}  // namespace turbdisp
