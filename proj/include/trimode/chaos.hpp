#ifndef TRIMODE_CHAOS_HPP
#define TRIMODE_CHAOS_HPP

// Chaos diagnostics of the mean-field dynamics: Poincare sections at
// theta_m = 0, largest Lyapunov exponents (two-trajectory reset scheme and
// fundamental-matrix scheme) and Lyapunov rasters on an energy shell.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "trimode/dynamics.hpp"
#include "trimode/model.hpp"
#include "trimode/parallel.hpp"

namespace trimode {

// ---------------------------------------------------------------------------
// Poincare sections
// ---------------------------------------------------------------------------

enum class CrossingDirection { positive, negative, both };

struct SectionPoint {
  double t;
  double rho0;
  double theta_s;
  double m;
  double theta_m;  // residual after refinement, ~0
  double energy;
};

struct PoincareSection {
  double energy = 0.0;  // energy of the first initial condition
  std::vector<double> initial_energies;
  std::vector<std::vector<SectionPoint>> crossings;
  CrossingDirection crossing_direction = CrossingDirection::both;
  std::vector<std::string> warnings;

  std::size_t total_crossings() const {
    std::size_t n = 0;
    for (const auto& c : crossings) n += c.size();
    return n;
  }
};

namespace detail {
// theta_m = arg(z+ conj(z-)); the section theta_m = 0 (mod 2pi) is the zero
// set of Im(z+ conj(z-)) restricted to Re(z+ conj(z-)) > 0.
inline cplx larmor_product(const Real6& y) {
  return cplx(y[0], y[1]) * std::conj(cplx(y[4], y[5]));
}
}  // namespace detail

inline std::vector<SectionPoint> section_crossings(const ClassicalState& z0, double t_end,
                                                   const ModelParams& p, CrossingDirection dir,
                                                   const IntegratorConfig& cfg = {}) {
  MeanFieldStepper stepper(MeanFieldRhs{p}, cfg.control());
  stepper.initialize(to_real(z0), 0.0);
  std::vector<SectionPoint> out;
  double h_prev = detail::larmor_product(stepper.state()).imag();
  while (stepper.time() < t_end) {
    stepper.step(t_end);
    const double h_cur = detail::larmor_product(stepper.state()).imag();
    const bool up = h_prev < 0.0 && h_cur >= 0.0;
    const bool down = h_prev > 0.0 && h_cur <= 0.0;
    if ((up && dir != CrossingDirection::negative) || (down && dir != CrossingDirection::positive)) {
      auto g = [&](double t) { return detail::larmor_product(stepper.interpolate(t)).imag(); };
      double tc = stepper.time();
      if (h_cur != 0.0) {
        boost::uintmax_t iters = 100;
        auto [lo, hi] = boost::math::tools::toms748_solve(
            g, stepper.previous_time(), stepper.time(), h_prev, h_cur,
            boost::math::tools::eps_tolerance<double>(52), iters);
        tc = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
      }
      const Real6 yc = stepper.interpolate(tc);
      const cplx lp = detail::larmor_product(yc);
      if (lp.real() > 0.0) {
        const ClassicalState z = from_real(yc);
        const CanonicalCoords c = zeta_to_canonical(z);
        out.push_back({tc, c.rho0, c.theta_s, c.m, std::arg(lp), mf_energy(z, p)});
      }
    }
    h_prev = h_cur;
  }
  return out;
}

inline PoincareSection poincare_section(const std::vector<ClassicalState>& initials, double t_end,
                                        const ModelParams& p,
                                        CrossingDirection dir = CrossingDirection::both,
                                        const IntegratorConfig& cfg = {}) {
  PoincareSection sec;
  sec.crossing_direction = dir;
  sec.crossings.resize(initials.size());
  for (const auto& z : initials) {
    z.require_normalized("poincare_section");
    sec.initial_energies.push_back(mf_energy(z, p));
  }
  if (!initials.empty()) sec.energy = sec.initial_energies.front();
  parallel_for(initials.size(), [&](std::size_t k) {
    sec.crossings[k] = section_crossings(initials[k], t_end, p, dir, cfg);
  });
  for (std::size_t k = 0; k < initials.size(); ++k) {
    if (sec.crossings[k].empty())
      sec.warnings.push_back("trajectory " + std::to_string(k) + " produced no section crossings");
  }
  return sec;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents
// ---------------------------------------------------------------------------

enum class LyapunovMethod { reset, fundamental };

inline const char* to_string(LyapunovMethod m) {
  return m == LyapunovMethod::reset ? "reset" : "fundamental";
}

struct LyapunovConfig {
  double xi0 = 1e-8;
  double t_reset = 1.0;
  double t_min = 100.0;
  double t_total = 2000.0;
  std::uint64_t seed = 0;
  IntegratorConfig integrator{};

  void validate() const {
    if (!(xi0 > 0.0 && xi0 < 1e-3)) throw ConfigError("LyapunovConfig: xi0 must be in (0, 1e-3)");
    if (!(t_reset > 0.0)) throw ConfigError("LyapunovConfig: t_reset must be > 0");
    if (!(t_min >= 0.0 && t_min < t_total)) throw ConfigError("LyapunovConfig: need 0 <= t_min < t_total");
    if ((t_total - t_min) / t_reset < 10.0)
      throw ConfigError("LyapunovConfig: fewer than 10 reset intervals after t_min");
    integrator.validate();
  }
};

struct LyapunovEstimate {
  double lambda = 0.0;
  double std_error = 0.0;
  LyapunovMethod method = LyapunovMethod::reset;
  std::size_t intervals = 0;
};

namespace detail {

/// Uniform random unit vector in the tangent space of the unit sphere at y.
inline Real6 random_tangent(const Real6& y, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Real6 u;
  for (;;) {
    double dot = 0.0, yy = 0.0;
    for (int i = 0; i < 6; ++i) {
      u[i] = gauss(rng);
      dot += u[i] * y[i];
      yy += y[i] * y[i];
    }
    double nrm = 0.0;
    for (int i = 0; i < 6; ++i) {
      u[i] -= dot / yy * y[i];
      nrm += u[i] * u[i];
    }
    nrm = std::sqrt(nrm);
    if (nrm > 1e-6) {
      for (auto& v : u) v /= nrm;
      return u;
    }
  }
}

inline LyapunovEstimate summarize(const std::vector<double>& rates, LyapunovMethod method) {
  LyapunovEstimate est;
  est.method = method;
  est.intervals = rates.size();
  double mean = 0.0;
  for (double v : rates) mean += v;
  mean /= static_cast<double>(rates.size());
  double var = 0.0;
  for (double v : rates) var += (v - mean) * (v - mean);
  var /= static_cast<double>(rates.size() - 1);
  est.lambda = mean;
  est.std_error = std::sqrt(var / static_cast<double>(rates.size()));
  return est;
}

inline std::size_t interval_count(const LyapunovConfig& cfg) {
  return static_cast<std::size_t>(std::floor(cfg.t_total / cfg.t_reset + 1e-9));
}

}  // namespace detail

/// Two co-integrated trajectories with separation renormalised to xi0 every
/// t_reset; lambda is the mean of the per-interval rates after t_min.
inline LyapunovEstimate lyapunov_reset(const ClassicalState& z0, const LyapunovConfig& cfg,
                                       const ModelParams& p) {
  z0.require_normalized("lyapunov_reset");
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const Real6 y0 = to_real(z0);
  const Real6 u = detail::random_tangent(y0, rng);
  std::array<double, 12> pair;
  for (int i = 0; i < 6; ++i) {
    pair[i] = y0[i];
    pair[6 + i] = y0[i] + cfg.xi0 * u[i];
  }
  Dop853<12, PairRhs> stepper(PairRhs{p}, cfg.integrator.control());
  const std::size_t n = detail::interval_count(cfg);
  std::vector<double> rates;
  double h = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = k * cfg.t_reset;
    const double t1 = t0 + cfg.t_reset;
    stepper.initialize(pair, t0, h);
    while (stepper.time() < t1) stepper.step(t1);
    h = stepper.step_size();
    pair = stepper.state();
    double xi = 0.0;
    for (int i = 0; i < 6; ++i) xi += (pair[6 + i] - pair[i]) * (pair[6 + i] - pair[i]);
    xi = std::sqrt(xi);
    if (!(xi > 0.0) || !std::isfinite(xi)) throw NumericalError("lyapunov_reset: degenerate separation");
    if (t0 >= cfg.t_min - 1e-9) rates.push_back(std::log(xi / cfg.xi0) / cfg.t_reset);
    const double scale = cfg.xi0 / xi;
    for (int i = 0; i < 6; ++i) pair[6 + i] = pair[i] + scale * (pair[6 + i] - pair[i]);
  }
  return detail::summarize(rates, LyapunovMethod::reset);
}

/// Deviation vector propagated by the fundamental matrix, renormalised every
/// t_reset and additionally whenever it grows beyond 1e6.
inline LyapunovEstimate lyapunov_fundamental(const ClassicalState& z0, const LyapunovConfig& cfg,
                                             const ModelParams& p) {
  z0.require_normalized("lyapunov_fundamental");
  cfg.validate();
  constexpr double kOverflowGuard = 1e6;
  std::mt19937_64 rng(cfg.seed);
  Real6 y = to_real(z0);
  const Real6 u = detail::random_tangent(y, rng);
  Eigen::Matrix<double, 6, 1> xi;
  for (int i = 0; i < 6; ++i) xi[i] = u[i];

  Dop853<42, VariationalRhs> stepper(VariationalRhs{p}, cfg.integrator.control());
  const std::size_t n = detail::interval_count(cfg);
  std::vector<double> rates;
  double h = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = k * cfg.t_reset;
    const double t1 = t0 + cfg.t_reset;
    double log_growth = 0.0;
    VariationalState v{y, Matrix6::Identity()};
    stepper.initialize(pack(v), t0, h);
    while (stepper.time() < t1) {
      stepper.step(t1);
      const Packed42& s = stepper.state();
      const Eigen::Map<const Matrix6> phi(s.data() + 6);
      const double grown = (phi * xi).norm();
      if (grown > kOverflowGuard && stepper.time() < t1) {
        log_growth += std::log(grown);
        xi = phi * xi / grown;
        v = unpack(s);
        v.phi.setIdentity();
        h = stepper.step_size();
        stepper.initialize(pack(v), stepper.time(), h);
      }
    }
    h = stepper.step_size();
    const VariationalState end = unpack(stepper.state());
    const Eigen::Matrix<double, 6, 1> w = end.phi * xi;
    const double grown = w.norm();
    if (!(grown > 0.0) || !std::isfinite(grown))
      throw NumericalError("lyapunov_fundamental: degenerate deviation vector");
    log_growth += std::log(grown);
    xi = w / grown;
    y = end.y;
    if (t0 >= cfg.t_min - 1e-9) rates.push_back(log_growth / cfg.t_reset);
  }
  return detail::summarize(rates, LyapunovMethod::fundamental);
}

inline LyapunovEstimate lyapunov(const ClassicalState& z0, const LyapunovConfig& cfg,
                                 const ModelParams& p, LyapunovMethod method) {
  return method == LyapunovMethod::reset ? lyapunov_reset(z0, cfg, p)
                                         : lyapunov_fundamental(z0, cfg, p);
}

// ---------------------------------------------------------------------------
// Lyapunov maps on an energy shell
// ---------------------------------------------------------------------------

struct ShellCell {
  int i = 0;  // rho0 index
  int j = 0;  // theta_s index
  double rho0 = 0.0;
  double theta_s = 0.0;
  std::optional<double> m;  // none: outside the shell
};

/// Cells of the shell raster with m solved for the shell energy.
inline std::vector<ShellCell> shell_cells(const EnergyShellSpec& shell, const ModelParams& p) {
  shell.validate();
  std::vector<ShellCell> cells(shell.size());
  for (int i = 0; i < shell.n_rho0; ++i) {
    for (int j = 0; j < shell.n_theta_s; ++j) {
      ShellCell& c = cells[static_cast<std::size_t>(i) * shell.n_theta_s + j];
      c.i = i;
      c.j = j;
      c.rho0 = shell.rho0_at(i);
      c.theta_s = shell.theta_s_at(j);
      c.m = solve_m_for_energy(c.rho0, c.theta_s, shell.theta_m_fixed, shell.energy, p);
    }
  }
  return cells;
}

inline ClassicalState cell_state(const ShellCell& c, const EnergyShellSpec& shell) {
  return canonical_to_zeta(CanonicalCoords::make(c.rho0, c.theta_s, *c.m, shell.theta_m_fixed));
}

struct LyapunovMap {
  EnergyShellSpec shell;
  LyapunovMethod method = LyapunovMethod::reset;
  std::vector<ShellCell> cells;                       // row-major (i, j)
  std::vector<std::optional<LyapunovEstimate>> values;  // none: outside the shell

  std::size_t populated() const {
    std::size_t n = 0;
    for (const auto& v : values) n += v.has_value();
    return n;
  }
};

inline LyapunovMap lyapunov_map(const EnergyShellSpec& shell, const LyapunovConfig& cfg,
                                const ModelParams& p,
                                LyapunovMethod method = LyapunovMethod::reset) {
  cfg.validate();
  LyapunovMap map;
  map.shell = shell;
  map.method = method;
  map.cells = shell_cells(shell, p);
  map.values.resize(map.cells.size());
  parallel_for(map.cells.size(), [&](std::size_t k) {
    const ShellCell& c = map.cells[k];
    if (!c.m) return;
    LyapunovConfig cell_cfg = cfg;
    cell_cfg.seed = derive_seed(cfg.seed, k);
    map.values[k] = lyapunov(cell_state(c, shell), cell_cfg, p, method);
  });
  return map;
}

}  // namespace trimode

#endif  // TRIMODE_CHAOS_HPP
