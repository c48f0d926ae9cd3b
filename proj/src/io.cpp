#include "turbdisp/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>

namespace turbdisp {

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << csv_field(fields[i]);
  }
  os_ << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw FormatError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::vector<std::string> meta_header(const TableMeta& m) {
  std::vector<std::string> h = {"model", "alpha", "beta", "e0",    "a",
                                "ell0",  "ell1",  "dim",  "kappa", "seed"};
  for (const auto& [k, v] : m.extra) h.push_back(k);
  return h;
}

std::vector<std::string> meta_values(const TableMeta& m) {
  const auto& p = m.params;
  std::vector<std::string> v = {m.model,
                                format_number(p.alpha),
                                format_number(p.beta),
                                format_number(p.e0),
                                format_number(p.a),
                                format_number(p.ell0),
                                format_number(p.ell1),
                                std::to_string(p.dim),
                                format_number(m.kappa),
                                std::to_string(m.seed)};
  for (const auto& [k, x] : m.extra) v.push_back(x);
  return v;
}

std::vector<std::string> component_names(int dim) {
  std::vector<std::string> n;
  for (int i = 0; i < dim; ++i) n.push_back("x" + std::to_string(i));
  return n;
}

// Little-endian primitives, independent of host byte order.
void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b.data(), 8);
}
void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b.data(), 4);
}
void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
void put_f64s(std::ostream& os, const std::vector<double>& v) {
  for (double x : v) put_f64(os, x);
}
void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void read_exact(std::istream& is, char* p, std::size_t n) {
  is.read(p, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) throw FormatError("binary: truncated input");
}
std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  read_exact(is, reinterpret_cast<char*>(b.data()), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  read_exact(is, reinterpret_cast<char*>(b.data()), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }
std::vector<double> get_f64s(std::istream& is, std::uint64_t n) {
  if (n > (std::uint64_t{1} << 40)) throw FormatError("binary: implausible array length");
  std::vector<double> v(n);
  for (auto& x : v) x = get_f64(is);
  return v;
}
std::string get_str(std::istream& is) {
  const std::uint32_t n = get_u32(is);
  if (n > 4096) throw FormatError("binary: implausible string length");
  std::string s(n, '\0');
  read_exact(is, s.data(), n);
  return s;
}

void put_magic(std::ostream& os, const char* magic) {
  os.write(magic, 4);
  put_u32(os, kSnapshotVersion);
}
void expect_magic(std::istream& is, const char* magic) {
  std::array<char, 4> m{};
  read_exact(is, m.data(), 4);
  if (std::memcmp(m.data(), magic, 4) != 0)
    throw FormatError(std::string("binary: expected magic ") + magic);
  const std::uint32_t v = get_u32(is);
  if (v != kSnapshotVersion) throw FormatError("binary: unsupported version " + std::to_string(v));
}

void put_params(std::ostream& os, const SpectrumParams& p) {
  for (double x : {p.alpha, p.beta, p.e0, p.a, p.ell0, p.ell1}) put_f64(os, x);
  put_u32(os, static_cast<std::uint32_t>(p.dim));
}
SpectrumParams get_params(std::istream& is) {
  SpectrumParams p;
  p.alpha = get_f64(is);
  p.beta = get_f64(is);
  p.e0 = get_f64(is);
  p.a = get_f64(is);
  p.ell0 = get_f64(is);
  p.ell1 = get_f64(is);
  p.dim = static_cast<int>(get_u32(is));
  if (p.dim != 2 && p.dim != 3) throw FormatError("binary: bad dimension");
  return p;
}

}  // namespace

TableMeta meta_of(const PairEnsemble& ens) {
  return TableMeta{ens.model, ens.params, ens.kappa, ens.seed, {}};
}

void write_series_csv(std::ostream& os, const Series& s, const TableMeta& meta,
                      std::string_view x_name, std::string_view y_name) {
  CsvWriter w(os);
  auto h = meta_header(meta);
  h.insert(h.end(), {std::string(x_name), std::string(y_name), "stderr"});
  w.row(h);
  const auto mv = meta_values(meta);
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    auto r = mv;
    r.push_back(format_number(s.t[i]));
    r.push_back(format_number(s.y[i]));
    r.push_back(i < s.se.size() ? format_number(s.se[i]) : std::string());
    w.row(r);
  }
}

void write_diffusivity_csv(std::ostream& os, const std::vector<DiffusivityBin>& bins,
                           const TableMeta& meta) {
  CsvWriter w(os);
  auto h = meta_header(meta);
  h.insert(h.end(), {"r_lo", "r_hi", "r_center", "value", "stderr", "samples", "missing"});
  w.row(h);
  const auto mv = meta_values(meta);
  for (const auto& b : bins) {
    auto r = mv;
    r.push_back(format_number(b.r_lo));
    r.push_back(format_number(b.r_hi));
    r.push_back(format_number(b.r_center));
    r.push_back(b.missing ? std::string() : format_number(b.value));
    r.push_back(b.missing ? std::string() : format_number(b.stderr_));
    r.push_back(std::to_string(b.samples));
    r.push_back(b.missing ? "1" : "0");
    w.row(r);
  }
}

void write_table_csv(std::ostream& os, const TableMeta& meta, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
  CsvWriter w(os);
  auto h = meta_header(meta);
  h.insert(h.end(), columns.begin(), columns.end());
  w.row(h);
  const auto mv = meta_values(meta);
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::invalid_argument("write_table_csv: ragged row");
    auto r = mv;
    for (double x : row) r.push_back(format_number(x));
    w.row(r);
  }
}

void write_trajectories_csv(std::ostream& os, const PairEnsemble& ens) {
  CsvWriter w(os);
  std::vector<std::string> h = {"t", "pair_id"};
  for (auto& c : component_names(ens.dim)) h.push_back(c);
  w.row(h);
  for (std::size_t p = 0; p < ens.n_pairs; ++p) {
    for (std::size_t ti = 0; ti < ens.n_times(); ++ti) {
      std::vector<std::string> r = {format_number(ens.times[ti]), std::to_string(p)};
      for (double x : ens.at(p, ti)) r.push_back(format_number(x));
      w.row(r);
    }
  }
}

void write_scalar_csv(std::ostream& os, const std::vector<Vec>& points, const ScalarValues& v) {
  if (points.size() != v.value.size())
    throw std::invalid_argument("write_scalar_csv: point and value counts differ");
  CsvWriter w(os);
  const int dim = points.empty() ? 2 : static_cast<int>(points.front().size());
  auto h = component_names(dim);
  h.insert(h.end(), {"value", "stderr"});
  w.row(h);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> r;
    for (int c = 0; c < dim; ++c) r.push_back(format_number(points[i](c)));
    r.push_back(format_number(v.value[i]));
    r.push_back(i < v.stderr_.size() ? format_number(v.stderr_[i]) : std::string());
    w.row(r);
  }
}

void write_field_snapshot(std::ostream& os, const SpectralField& field, const FieldOrigin& origin) {
  put_magic(os, "TDSF");
  put_params(os, field.params());
  put_f64(os, field.modes().band.k_min);
  put_f64(os, field.modes().band.k_max);
  put_u32(os, static_cast<std::uint32_t>(origin.layout.n_shells));
  put_u32(os, static_cast<std::uint32_t>(origin.layout.n_dirs));
  put_u32(os, origin.layout.jitter ? 1u : 0u);
  put_u64(os, origin.seed);
  put_u64(os, origin.realization);
  put_f64(os, field.time());
  put_u64(os, field.stream_position());
  const auto amp = field.raw_amplitudes();
  put_u64(os, amp.size());
  for (double x : amp) put_f64(os, x);
  if (!os) throw FormatError("snapshot: write failed");
}

SpectralField read_field_snapshot(std::istream& is) {
  expect_magic(is, "TDSF");
  const SpectrumParams p = get_params(is);
  Band band;
  band.k_min = get_f64(is);
  band.k_max = get_f64(is);
  ModeLayout layout;
  layout.n_shells = static_cast<int>(get_u32(is));
  layout.n_dirs = static_cast<int>(get_u32(is));
  layout.jitter = get_u32(is) != 0;
  const std::uint64_t seed = get_u64(is);
  SynthesisOptions so;
  so.band = band;
  so.layout = layout;
  so.realization = get_u64(is);
  const double time = get_f64(is);
  const std::uint64_t position = get_u64(is);
  const std::uint64_t n = get_u64(is);
  SpectralField f = synthesize(p, layout.n_shells * layout.n_dirs, seed, so);
  if (n != f.raw_amplitudes().size()) throw FormatError("snapshot: amplitude count mismatch");
  const auto amp = get_f64s(is, n);
  std::copy(amp.begin(), amp.end(), f.raw_amplitudes().begin());
  f.set_time(time);
  f.seek_stream(position);
  return f;
}

void write_ensemble_binary(std::ostream& os, const PairEnsemble& ens) {
  put_magic(os, "TDPE");
  put_str(os, ens.model);
  put_params(os, ens.params);
  put_u32(os, static_cast<std::uint32_t>(ens.dim));
  put_f64(os, ens.kappa);
  put_f64(os, ens.dt);
  put_u64(os, ens.seed);
  put_u64(os, ens.steps_taken);
  put_u64(os, ens.n_pairs);
  put_u64(os, ens.n_times());
  put_u32(os, ens.drift.empty() ? 0u : 1u);
  put_u32(os, ens.absorbed.empty() ? 0u : 1u);
  put_f64s(os, ens.times);
  put_f64s(os, ens.data);
  if (!ens.absorbed.empty())
    os.write(reinterpret_cast<const char*>(ens.absorbed.data()),
             static_cast<std::streamsize>(ens.absorbed.size()));
  put_f64s(os, ens.drift);
  if (!os) throw FormatError("ensemble: write failed");
}

PairEnsemble read_ensemble_binary(std::istream& is) {
  expect_magic(is, "TDPE");
  PairEnsemble e;
  e.model = get_str(is);
  e.params = get_params(is);
  e.dim = static_cast<int>(get_u32(is));
  if (e.dim != 2 && e.dim != 3) throw FormatError("ensemble: bad dimension");
  e.kappa = get_f64(is);
  e.dt = get_f64(is);
  e.seed = get_u64(is);
  e.steps_taken = get_u64(is);
  e.n_pairs = get_u64(is);
  const std::uint64_t nt = get_u64(is);
  const bool has_drift = get_u32(is) != 0;
  const bool has_absorbed = get_u32(is) != 0;
  const std::uint64_t n = e.n_pairs * nt * static_cast<std::uint64_t>(e.dim);
  e.times = get_f64s(is, nt);
  e.data = get_f64s(is, n);
  if (has_absorbed) {
    e.absorbed.resize(e.n_pairs);
    read_exact(is, reinterpret_cast<char*>(e.absorbed.data()), e.n_pairs);
  }
  if (has_drift) e.drift = get_f64s(is, n);
  return e;
}

}  // namespace turbdisp
