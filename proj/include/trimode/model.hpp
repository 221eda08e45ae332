#ifndef TRIMODE_MODEL_HPP
#define TRIMODE_MODEL_HPP

// Model parameters, classical mean-field states and the canonical
// (rho0, theta_s, m, theta_m) chart of the three-mode spinor model.
//
// Conventions used throughout the library:
//   * modes are ordered (+1, 0, -1), i.e. zeta[0] = zeta_{+1};
//   * energies are in units of gN and times in units of hbar/gN;
//   * the real six-vector layout is (Re z+, Im z+, Re z0, Im z0, Re z-, Im z-).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "trimode/error.hpp"

namespace trimode {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

enum Mode : int { kPlus = 0, kZero = 1, kMinus = 2 };

/// Couplings of the three-mode Hamiltonian. The pair coupling g is derived
/// as gn / n_atoms and never stored.
struct ModelParams {
  double gn = 1.0;
  double q = 1.0;
  double r = 0.0;
  int n_atoms = 100;

  double pair_coupling() const { return gn / static_cast<double>(n_atoms); }

  void validate() const {
    if (n_atoms < 1) throw DomainError("ModelParams: n_atoms must be >= 1");
    if (!std::isfinite(gn) || !std::isfinite(q) || !std::isfinite(r))
      throw DomainError("ModelParams: couplings must be finite");
  }

  /// Parameters of the sign-reversed Hamiltonian -H.
  ModelParams reversed() const { return {-gn, -q, -r, n_atoms}; }
};

/// Mean-field amplitudes (zeta_{+1}, zeta_0, zeta_{-1}).
struct ClassicalState {
  std::array<cplx, 3> zeta{cplx(0.0), cplx(1.0), cplx(0.0)};

  double population(Mode i) const { return std::norm(zeta[i]); }
  double norm2() const {
    return std::norm(zeta[0]) + std::norm(zeta[1]) + std::norm(zeta[2]);
  }
  double magnetization() const { return population(kPlus) - population(kMinus); }

  bool is_normalized(double tol = 1e-10) const { return std::abs(norm2() - 1.0) < tol; }

  ClassicalState normalized() const {
    const double n = std::sqrt(norm2());
    if (!(n > 0.0)) throw DomainError("ClassicalState: zero vector cannot be normalized");
    return {{zeta[0] / n, zeta[1] / n, zeta[2] / n}};
  }

  void require_normalized(const char* where) const {
    if (!is_normalized())
      throw DomainError(std::string(where) + ": state is not normalized");
  }
};

inline std::array<double, 6> to_real(const ClassicalState& z) {
  return {z.zeta[0].real(), z.zeta[0].imag(), z.zeta[1].real(),
          z.zeta[1].imag(), z.zeta[2].real(), z.zeta[2].imag()};
}

template <class Vec>
ClassicalState from_real(const Vec& y) {
  return {{cplx(y[0], y[1]), cplx(y[2], y[3]), cplx(y[4], y[5])}};
}

/// Distance between two states modulo a global phase.
inline double gauge_distance(const ClassicalState& a, const ClassicalState& b) {
  cplx overlap = 0.0;
  for (int i = 0; i < 3; ++i) overlap += std::conj(a.zeta[i]) * b.zeta[i];
  const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) d2 += std::norm(a.zeta[i] * phase - b.zeta[i]);
  return std::sqrt(d2);
}

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Canonical phase-space chart. The pair (theta_s, theta_m) is identified
/// modulo the lattice spanned by (2pi, 2pi) and (2pi, -2pi), so theta_s has
/// period 4pi at fixed theta_m. Stored representative: theta_m in (-pi, pi],
/// theta_s in (-2pi, 2pi].
struct CanonicalCoords {
  double rho0 = 1.0;
  double theta_s = 0.0;
  double m = 0.0;
  double theta_m = 0.0;
  // Set by zeta_to_canonical when a phase is undefined (vanishing mode).
  bool theta_s_defined = true;
  bool theta_m_defined = true;

  static constexpr double kPopulationTol = 1e-12;

  static CanonicalCoords make(double rho0, double theta_s, double m, double theta_m) {
    if (!std::isfinite(rho0) || !std::isfinite(theta_s) || !std::isfinite(m) ||
        !std::isfinite(theta_m))
      throw DomainError("CanonicalCoords: non-finite coordinate");
    if (rho0 < -kPopulationTol || rho0 > 1.0 + kPopulationTol)
      throw DomainError("CanonicalCoords: rho0 outside [0, 1]");
    rho0 = std::clamp(rho0, 0.0, 1.0);
    const double side = 1.0 - rho0;
    if (side + m < -kPopulationTol || side - m < -kPopulationTol)
      throw DomainError("CanonicalCoords: |m| exceeds 1 - rho0");
    m = std::clamp(m, -side, side);
    CanonicalCoords c{rho0, theta_s, m, theta_m};
    c.wrap();
    return c;
  }

  void wrap() {
    // shift by k (2pi, 2pi) to bring theta_m into (-pi, pi]
    const double wm = wrap_pi(theta_m);
    theta_s += wm - theta_m;
    theta_m = wm;
    // then by multiples of (4pi, 0)
    double ws = std::remainder(theta_s, 2.0 * kTwoPi);
    if (ws <= -kTwoPi) ws += 2.0 * kTwoPi;
    theta_s = ws;
  }
};

inline ClassicalState canonical_to_zeta(const CanonicalCoords& c) {
  const double side = 1.0 - c.rho0;
  const double pp = side + c.m;
  const double pm = side - c.m;
  if (pp < -CanonicalCoords::kPopulationTol || pm < -CanonicalCoords::kPopulationTol ||
      c.rho0 < -CanonicalCoords::kPopulationTol)
    throw DomainError("canonical_to_zeta: negative mode population");
  const double a1 = std::sqrt(std::max(pp, 0.0) / 2.0);
  const double a0 = std::sqrt(std::max(c.rho0, 0.0));
  const double am = std::sqrt(std::max(pm, 0.0) / 2.0);
  ClassicalState z{{std::polar(a1, 0.5 * (c.theta_s + c.theta_m)), cplx(a0, 0.0),
                    std::polar(am, 0.5 * (c.theta_s - c.theta_m))}};
  return z.normalized();
}

inline CanonicalCoords zeta_to_canonical(const ClassicalState& z) {
  const double p1 = z.population(kPlus);
  const double p0 = z.population(kZero);
  const double pm = z.population(kMinus);
  const double tol = CanonicalCoords::kPopulationTol;
  CanonicalCoords c;
  c.rho0 = p0;
  c.m = p1 - pm;
  const bool side_ok = p1 >= tol && pm >= tol;
  c.theta_m_defined = side_ok;
  c.theta_s_defined = side_ok && p0 >= tol;
  // Phases relative to zeta_0 fix the global gauge (zeta_0 real, >= 0).
  const double ref = p0 >= tol ? std::arg(z.zeta[kZero]) : 0.0;
  const double t1 = side_ok ? wrap_pi(std::arg(z.zeta[kPlus]) - ref) : 0.0;
  const double tm = side_ok ? wrap_pi(std::arg(z.zeta[kMinus]) - ref) : 0.0;
  c.theta_s = c.theta_s_defined ? t1 + tm : 0.0;
  c.theta_m = c.theta_m_defined ? t1 - tm : 0.0;
  c.wrap();
  return c;
}

/// Mean-field energy from the amplitudes.
inline double mf_energy(const ClassicalState& z, const ModelParams& p) {
  const cplx z1 = z.zeta[kPlus], z0 = z.zeta[kZero], zm = z.zeta[kMinus];
  const double p1 = std::norm(z1), p0 = std::norm(z0), pm = std::norm(zm);
  const double m = p1 - pm;
  const cplx spin_change = std::conj(z0) * std::conj(z0) * z1 * zm;
  const double interaction = 2.0 * spin_change.real() + p0 * (p1 + pm) + 0.5 * m * m;
  const cplx rf = (std::conj(z1) + std::conj(zm)) * z0;
  return p.gn * interaction + p.q * (p1 + pm) + p.r / kSqrt2 * 2.0 * rf.real();
}

/// Mean-field energy in the canonical chart.
inline double mf_energy(const CanonicalCoords& c, const ModelParams& p) {
  const double side = 1.0 - c.rho0;
  const double cross = std::sqrt(std::max(side * side - c.m * c.m, 0.0));
  const double interaction =
      c.rho0 * (side + cross * std::cos(c.theta_s)) + 0.5 * c.m * c.m;
  const double rf = std::sqrt(c.rho0) *
                    (std::sqrt(std::max(side + c.m, 0.0)) * std::cos(0.5 * (c.theta_s + c.theta_m)) +
                     std::sqrt(std::max(side - c.m, 0.0)) * std::cos(0.5 * (c.theta_s - c.theta_m)));
  return p.gn * interaction + p.q * side + p.r * rf;
}

/// Find m such that the canonical point (rho0, theta_s, m, theta_m) has the
/// target energy. Among several roots the smallest |m| wins, ties go to +m.
/// Returns nullopt when the point lies outside the energy shell.
inline std::optional<double> solve_m_for_energy(double rho0, double theta_s, double theta_m,
                                                double target_energy, const ModelParams& p) {
  if (!std::isfinite(target_energy)) throw DomainError("solve_m_for_energy: non-finite energy");
  if (rho0 < 0.0 || rho0 > 1.0) throw DomainError("solve_m_for_energy: rho0 outside [0, 1]");
  constexpr double kEnergyTol = 1e-10;
  const double side = 1.0 - rho0;
  auto residual_m = [&](double m) {
    CanonicalCoords c{rho0, theta_s, std::clamp(m, -side, side), theta_m};
    return mf_energy(c, p) - target_energy;
  };
  if (side < 1e-14) {
    if (std::abs(residual_m(0.0)) < kEnergyTol) return 0.0;
    return std::nullopt;
  }
  // m = side * sin(phi) removes the square-root endpoint singularities;
  // |m| grows monotonically with |phi|.
  auto residual = [&](double phi) { return residual_m(side * std::sin(phi)); };

  constexpr int kScan = 1024;
  const double half = 0.5 * kPi;
  auto refine = [&](double a, double b, double fa) -> double {
    if (fa == 0.0) return a;
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto [lo, hi] = boost::math::tools::toms748_solve(residual, a, b, tol, iters);
    const double flo = std::abs(residual(lo)), fhi = std::abs(residual(hi));
    return flo <= fhi ? lo : hi;
  };

  const double f0 = residual(0.0);
  if (std::abs(f0) < kEnergyTol) return 0.0;
  double prev_pos = f0, prev_neg = f0;
  for (int k = 1; k <= kScan; ++k) {
    const double a = half * (k - 1) / kScan;
    const double b = half * k / kScan;
    const double fp = residual(b);
    const double fn = residual(-b);
    std::optional<double> root_pos, root_neg;
    if (std::abs(fp) < kEnergyTol) {
      root_pos = b;
    } else if ((prev_pos < 0.0) != (fp < 0.0)) {
      root_pos = refine(a, b, prev_pos);
    }
    if (std::abs(fn) < kEnergyTol) {
      root_neg = -b;
    } else if ((prev_neg < 0.0) != (fn < 0.0)) {
      root_neg = refine(-b, -a, fn);
    }
    if (root_pos || root_neg) {
      std::optional<double> best;
      for (const auto& phi : {root_pos, root_neg}) {
        if (!phi) continue;
        const double m = side * std::sin(*phi);
        if (!best || std::abs(m) < std::abs(*best) - 1e-15) best = m;
      }
      return std::clamp(*best, -side, side);
    }
    prev_pos = fp;
    prev_neg = fn;
  }
  return std::nullopt;
}

/// Energy shell raster over the (rho0, theta_s) plane at fixed theta_m.
/// Grid points sit at cell centres; theta_s spans the full 4pi section.
struct EnergyShellSpec {
  double energy = 1.005;
  int n_rho0 = 80;
  int n_theta_s = 80;
  double theta_m_fixed = 0.0;
  double rho0_min = 0.0;
  double rho0_max = 1.0;
  double theta_s_min = -kTwoPi;
  double theta_s_max = kTwoPi;

  void validate() const {
    if (n_rho0 < 2 || n_theta_s < 2) throw ConfigError("EnergyShellSpec: grid dims must be >= 2");
    if (!std::isfinite(energy)) throw ConfigError("EnergyShellSpec: energy must be finite");
    if (!(rho0_min >= 0.0 && rho0_max <= 1.0 && rho0_min < rho0_max))
      throw ConfigError("EnergyShellSpec: invalid rho0 range");
    if (!(theta_s_min < theta_s_max)) throw ConfigError("EnergyShellSpec: invalid theta_s range");
  }

  double rho0_at(int i) const { return rho0_min + (i + 0.5) * (rho0_max - rho0_min) / n_rho0; }
  double theta_s_at(int j) const {
    return theta_s_min + (j + 0.5) * (theta_s_max - theta_s_min) / n_theta_s;
  }
  std::size_t size() const { return static_cast<std::size_t>(n_rho0) * n_theta_s; }
};

}  // namespace trimode

#endif  // TRIMODE_MODEL_HPP
