#ifndef TRIMODE_IO_HPP
#define TRIMODE_IO_HPP

// Plot-ready output: long-form tables written as CSV (with '#' metadata
// lines carrying the manifest hash) or JSON, run manifests, and optional
// grayscale PGM rasters of grid results.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "trimode/chaos.hpp"
#include "trimode/error.hpp"
#include "trimode/quantum.hpp"
#include "trimode/spectral.hpp"
#include "trimode/twa.hpp"

namespace trimode {

inline constexpr const char* kToolVersion = "1.0.0";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();  // keys sorted on dump
  std::string tool_version = kToolVersion;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;

  /// Hash over command, parameters and version; wall time and outputs excluded.
  std::string hash() const { return hex64(fnv1a(command + '\n' + parameters.dump() + '\n' + tool_version)); }

  nlohmann::json to_json() const {
    return {{"command", command},     {"parameters", parameters}, {"tool_version", tool_version},
            {"wall_time_s", wall_time_s}, {"outputs", outputs},   {"manifest_hash", hash()}};
  }
};

inline nlohmann::json to_json(const ModelParams& p) {
  return {{"gn", p.gn}, {"q", p.q}, {"r", p.r}, {"n_atoms", p.n_atoms}};
}

/// Long-form numeric table; NaN marks absent values.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> meta;  // extra "key: value" lines for the header

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) throw Error("Table: row width does not match the column count");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  return out;
}

inline void check_stream(const std::ofstream& out, const std::string& path) {
  if (!out) throw Error("write to '" + path + "' failed: " + std::strerror(errno));
}

inline void write_csv(const Table& t, const std::string& path, const RunManifest& m) {
  std::ofstream out = open_output(path);
  out << "# manifest_hash: " << m.hash() << '\n';
  out << "# command: " << m.command << '\n';
  out << "# parameters: " << m.parameters.dump() << '\n';
  out << "# tool_version: " << m.tool_version << '\n';
  for (const auto& line : t.meta) out << "# " << line << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  out.flush();
  check_stream(out, path);
}

inline nlohmann::json table_json(const Table& t, const RunManifest& m) {
  nlohmann::json cols = nlohmann::json::object();
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    nlohmann::json col = nlohmann::json::array();
    for (const auto& row : t.rows) {
      if (std::isfinite(row[c])) col.push_back(row[c]);
      else col.push_back(nullptr);
    }
    cols[t.columns[c]] = std::move(col);
  }
  return {{"manifest_hash", m.hash()}, {"meta", t.meta}, {"columns", t.columns}, {"data", cols}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  out.flush();
  check_stream(out, path);
}

/// 8-bit grayscale PGM of a row-major grid scaled to [min, max]; NaN is black.
inline void write_pgm(const std::vector<double>& values, int rows, int cols, const std::string& path) {
  if (static_cast<std::size_t>(rows) * cols != values.size()) throw Error("write_pgm: grid shape mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::ofstream out = open_output(path);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  // First raster row is the largest rho0 so the image reads with rho0 upward.
  for (int i = rows - 1; i >= 0; --i) {
    for (int j = 0; j < cols; ++j) {
      const double v = values[static_cast<std::size_t>(i) * cols + j];
      unsigned char px = 0;
      if (std::isfinite(v)) px = hi > lo ? static_cast<unsigned char>(std::lround(255.0 * (v - lo) / (hi - lo))) : 255;
      out.put(static_cast<char>(px));
    }
  }
  out.flush();
  check_stream(out, path);
}

// ---------------------------------------------------------------------------
// Result -> table conversions
// ---------------------------------------------------------------------------

inline Table to_table(const PoincareSection& s) {
  Table t{{"traj_id", "rho0", "theta_s", "m", "t"}, {}, {}};
  t.meta.push_back("units: theta_s in rad, t in hbar/gN");
  t.meta.push_back("section: theta_m = 0, direction " +
                   std::string(s.crossing_direction == CrossingDirection::both       ? "both"
                               : s.crossing_direction == CrossingDirection::positive ? "positive"
                                                                                     : "negative"));
  for (std::size_t k = 0; k < s.initial_energies.size(); ++k)
    t.meta.push_back("traj " + std::to_string(k) + " energy: " + format_number(s.initial_energies[k]));
  for (const auto& w : s.warnings) t.meta.push_back("warning: " + w);
  for (std::size_t k = 0; k < s.crossings.size(); ++k)
    for (const auto& c : s.crossings[k]) t.add({static_cast<double>(k), c.rho0, c.theta_s, c.m, c.t});
  return t;
}

inline Table to_table(const LyapunovMap& m) {
  Table t{{"i", "j", "rho0", "theta_s", "m", "lambda", "stderr"}, {}, {}};
  t.meta.push_back("units: lambda and stderr in gN/hbar, theta_s in rad; nan marks cells outside the energy shell");
  t.meta.push_back("energy: " + format_number(m.shell.energy) + ", theta_m: " + format_number(m.shell.theta_m_fixed) +
                   ", method: " + to_string(m.method));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < m.cells.size(); ++k) {
    const auto& c = m.cells[k];
    const auto& v = m.values[k];
    t.add({static_cast<double>(c.i), static_cast<double>(c.j), c.rho0, c.theta_s, c.m.value_or(nan),
           v ? v->lambda : nan, v ? v->std_error : nan});
  }
  return t;
}

inline Table to_table(const Spectrum& s) {
  Table t{{"block", "index", "eigenvalue"}, {}, {}};
  t.meta.push_back("units: eigenvalue in gN; block 0 = even, 1 = odd under n+ <-> n-");
  for (int b = 0; b < 2; ++b)
    for (Eigen::Index k = 0; k < s.blocks[b].values.size(); ++k)
      t.add({static_cast<double>(b), static_cast<double>(k), s.blocks[b].values[k]});
  return t;
}

inline Table to_table(const HusimiGrid& h) {
  Table t{{"i", "j", "rho0", "theta_s", "value"}, {}, {}};
  t.meta.push_back("theta_m: " + format_number(h.grid.theta_m_fixed) + ", m_grid_size: " + std::to_string(h.m_grid_size) +
                   (h.max_normalized ? ", max-normalized" : ", raw m-summed overlaps"));
  for (int i = 0; i < h.grid.n_rho0; ++i)
    for (int j = 0; j < h.grid.n_theta_s; ++j)
      t.add({static_cast<double>(i), static_cast<double>(j), h.grid.rho0_at(i), h.grid.theta_s_at(j), h.value(i, j)});
  return t;
}

inline Table to_table(const OtocSeries& s) {
  const bool err = !s.errors.empty();
  Table t{err ? std::vector<std::string>{"t", "C", "bootstrap_err"} : std::vector<std::string>{"t", "C"}, {}, {}};
  t.meta.push_back("operators: V = " + s.v_label + ", W = " + s.w_label + "; t in hbar/gN");
  for (const auto& w : s.warnings) t.meta.push_back("warning: " + w);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (err) t.add({s.times[k], s.values[k], s.errors[k]});
    else t.add({s.times[k], s.values[k]});
  }
  return t;
}

inline Table to_table(const TwaSeries& s) {
  Table t{{"t", "mean", "std", "bootstrap_err", "mean_energy"}, {}, {}};
  t.meta.push_back("observable: " + s.label + "; t in hbar/gN; energy per atom in gN");
  for (std::size_t k = 0; k < s.times.size(); ++k)
    t.add({s.times[k], s.mean[k], s.stddev[k], s.errors[k], s.mean_energy[k]});
  return t;
}

inline Table histogram_table(const SpacingHistogram& h, const BrodyFit& fit) {
  Table t{{"s_lo", "s_hi", "count", "density", "brody", "poisson", "wigner"}, {}, {}};
  t.meta.push_back("overlays evaluated at bin centres; brody b = " + format_number(fit.b));
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double c = 0.5 * (h.edges[k] + h.edges[k + 1]);
    t.add({h.edges[k], h.edges[k + 1], static_cast<double>(h.counts[k]), h.density[k], brody_pdf(c, fit.b),
           poisson_pdf(c), wigner_pdf(c)});
  }
  return t;
}

inline nlohmann::json to_json(const BrodyFit& f) {
  return {{"b", f.b}, {"alpha", f.alpha}, {"stderr", f.stderr_b}, {"n_spacings", f.n_spacings},
          {"log_likelihood", f.log_likelihood}};
}

inline nlohmann::json to_json(const LyapunovEstimate& e) {
  return {{"lambda", e.lambda}, {"std_error", e.std_error}, {"method", to_string(e.method)}, {"intervals", e.intervals}};
}

inline nlohmann::json to_json(const GrowthFit& g) {
  return {{"rate", g.rate},
          {"intercept", g.intercept},
          {"residual", g.residual},
          {"power_exponent", g.power_exponent},
          {"power_residual", std::isfinite(g.power_residual) ? nlohmann::json(g.power_residual) : nlohmann::json(nullptr)},
          {"exponential_preferred", g.exponential_preferred()},
          {"n_points", g.n_points}};
}

}  // namespace trimode

#endif  // TRIMODE_IO_HPP
