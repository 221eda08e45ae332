#ifndef TRIMODE_TWA_HPP
#define TRIMODE_TWA_HPP

// Truncated Wigner approximation: Gaussian sampling of SU(3) coherent
// states, ensemble observables with Weyl-ordering corrections, the
// semi-classical OTOC from stability derivatives, and growth-law fits.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "trimode/dynamics.hpp"
#include "trimode/model.hpp"
#include "trimode/parallel.hpp"
#include "trimode/quantum.hpp"

namespace trimode {

enum class DerivativeMethod { fundamental_matrix, two_trajectory };

inline const char* to_string(DerivativeMethod m) {
  return m == DerivativeMethod::fundamental_matrix ? "fundamental" : "two-trajectory";
}

struct TwaConfig {
  std::size_t n_samples = 1000;
  double hbar_eff = 0.0;  // 0 selects 1/N
  std::uint64_t seed = 0;
  DerivativeMethod derivative = DerivativeMethod::fundamental_matrix;
  double d0 = 1e-6;
  // Re-run the two-trajectory estimate with d0/2 and warn if C moves by more
  // than 1% at any time up to this horizon; 0 disables the check.
  double d0_check_horizon = 0.0;
  std::size_t bootstrap_resamples = 200;
  IntegratorConfig integrator{};

  void validate() const {
    if (n_samples < 2) throw ConfigError("TwaConfig: n_samples must be >= 2");
    if (!(d0 > 1e-10 && d0 < 1e-3)) throw ConfigError("TwaConfig: d0 must lie in (1e-10, 1e-3)");
    if (hbar_eff < 0.0) throw ConfigError("TwaConfig: hbar_eff must be >= 0");
    integrator.validate();
  }
  double hbar(int n_atoms) const { return hbar_eff > 0.0 ? hbar_eff : 1.0 / n_atoms; }
};

struct WignerSample {
  ClassicalState zeta;
};

/// Unitary on mode space with U (0,1,0) = center, built from two Givens
/// rotations: first in the (0,-1) plane, then in the (+1,0) plane.
inline Eigen::Matrix3cd center_rotation(const ClassicalState& center) {
  center.require_normalized("center_rotation");
  const cplx c1 = center.zeta[kPlus], c0 = center.zeta[kZero], cm = center.zeta[kMinus];
  const double w = std::sqrt(std::max(0.0, 1.0 - std::norm(cm)));
  Eigen::Matrix3cd a = Eigen::Matrix3cd::Identity();
  a(1, 1) = w;
  a(1, 2) = -std::conj(cm);
  a(2, 1) = cm;
  a(2, 2) = w;
  Eigen::Matrix3cd b = Eigen::Matrix3cd::Identity();
  if (w > 0.0) {
    const cplx u1 = c1 / w, u0 = c0 / w;
    b(0, 0) = std::conj(u0);
    b(0, 1) = u1;
    b(1, 0) = -std::conj(u1);
    b(1, 1) = u0;
  }
  return b * a;
}

inline ClassicalState rotate(const Eigen::Matrix3cd& u, const ClassicalState& z) {
  const Eigen::Vector3cd v(z.zeta[0], z.zeta[1], z.zeta[2]);
  const Eigen::Vector3cd w = u * v;
  ClassicalState out;
  out.zeta = {w[0], w[1], w[2]};
  return out;
}

/// Phase-fix a state so that zeta_0 is real and non-negative.
inline ClassicalState real_zero_gauge(const ClassicalState& z) {
  const double a = std::abs(z.zeta[kZero]);
  if (a == 0.0) return z;
  const cplx ph = std::conj(z.zeta[kZero]) / a;
  ClassicalState out;
  for (int k = 0; k < 3; ++k) out.zeta[k] = z.zeta[k] * ph;
  return out;
}

/// One sample of the Gaussian Wigner distribution around (0,1,0), before rotation.
inline ClassicalState draw_polar_sample(int n_atoms, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(n_atoms)));
  for (;;) {
    const cplx zp(gauss(rng) / 2.0, gauss(rng) / 2.0);
    const cplx zm(gauss(rng) / 2.0, gauss(rng) / 2.0);
    const double side = std::norm(zp) + std::norm(zm);
    if (side >= 1.0) continue;
    ClassicalState z;
    z.zeta = {zp, cplx(std::sqrt(1.0 - side), 0.0), zm};
    return z;
  }
}

inline std::vector<WignerSample> sample_wigner(const ClassicalState& center, int n_atoms, const TwaConfig& cfg) {
  cfg.validate();
  if (n_atoms < 1) throw ConfigError("sample_wigner: N must be >= 1");
  const Eigen::Matrix3cd u = center_rotation(center);
  std::vector<WignerSample> out(cfg.n_samples);
  parallel_for(cfg.n_samples, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(cfg.seed, k));
    out[k].zeta = rotate(u, draw_polar_sample(n_atoms, rng));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble statistics
// ---------------------------------------------------------------------------

/// Bootstrap standard error of the mean with a fixed resampling stream.
inline double bootstrap_error(const std::vector<double>& v, std::size_t resamples, std::uint64_t seed) {
  if (v.size() < 2 || resamples < 2) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  double s = 0.0, s2 = 0.0;
  for (std::size_t r = 0; r < resamples; ++r) {
    double m = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) m += v[pick(rng)];
    m /= static_cast<double>(v.size());
    s += m;
    s2 += m * m;
  }
  const double n = static_cast<double>(resamples);
  return std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)));
}

struct TwaSeries {
  std::string label;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stddev;  // quantum standard deviation of the observable
  std::vector<double> errors;  // bootstrap error of the mean
  std::vector<double> mean_energy;
};

namespace detail {

// Weyl symbols with |alpha_i|^2 = (N + 3/2) |zeta_i|^2, so that the symbol of
// the total number operator, sum |alpha|^2 - 3/2, equals N.
struct WeylMoments {
  double first;
  double second;
};

inline WeylMoments weyl_symbols(const std::string& raw, const ClassicalState& z, int n_atoms) {
  const double scale = n_atoms + 1.5;
  const double a1 = scale * z.population(kPlus), a0 = scale * z.population(kZero), am = scale * z.population(kMinus);
  auto number = [](double a) { return WeylMoments{a - 0.5, a * a - a}; };
  if (raw == "N0") return number(a0);
  if (raw == "N1") return number(a1);
  if (raw == "Nm1") return number(am);
  if (raw == "Sz") return {a1 - am, (a1 - am) * (a1 - am) - 0.5};
  throw ConfigError("twa_observable: unsupported observable '" + raw + "' (use N0, N1, Nm1, Sz, rho0, sz)");
}

}  // namespace detail

inline TwaSeries twa_observable(const ClassicalState& center, int n_atoms, const std::string& label,
                                const std::vector<double>& times, const TwaConfig& cfg, const ModelParams& p) {
  std::string raw = label;
  double norm = 1.0;
  if (label == "rho0" || label == "sz") {
    raw = label == "rho0" ? "N0" : "Sz";
    norm = 1.0 / n_atoms;
  }
  detail::weyl_symbols(raw, center, n_atoms);  // validates the label early
  const auto samples = sample_wigner(center, n_atoms, cfg);
  const std::size_t nt = times.size(), ns = samples.size();
  std::vector<double> first(nt * ns), second(nt * ns), energy(nt * ns);
  parallel_for(ns, [&](std::size_t k) {
    const TrajectoryRecord rec = integrate_at(samples[k].zeta, times, cfg.integrator, p);
    for (std::size_t i = 0; i < nt; ++i) {
      const auto w = detail::weyl_symbols(raw, rec.states[i], n_atoms);
      first[i * ns + k] = w.first;
      second[i * ns + k] = w.second;
      energy[i * ns + k] = mf_energy(rec.states[i], p);
    }
  });
  TwaSeries out;
  out.label = label;
  out.times = times;
  for (std::size_t i = 0; i < nt; ++i) {
    const std::vector<double> f(first.begin() + i * ns, first.begin() + (i + 1) * ns);
    double m1 = 0.0, m2 = 0.0, e = 0.0;
    for (std::size_t k = 0; k < ns; ++k) {
      m1 += f[k];
      m2 += second[i * ns + k];
      e += energy[i * ns + k];
    }
    m1 /= ns;
    m2 /= ns;
    out.mean.push_back(norm * m1);
    out.stddev.push_back(norm * std::sqrt(std::max(0.0, m2 - m1 * m1)));
    out.errors.push_back(norm * bootstrap_error(f, cfg.bootstrap_resamples, derive_seed(cfg.seed ^ 0xB007ULL, i)));
    out.mean_energy.push_back(e / ns);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semi-classical OTOC
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr int kRe0 = 2;  // index of Re zeta_0 in the real layout
inline constexpr int kIm0 = 3;

/// d rho0(t) / d Im zeta0(0) from the fundamental matrix at each time.
inline std::vector<double> rho0_derivative_fundamental(const ClassicalState& z0, const std::vector<double>& times,
                                                       const IntegratorConfig& cfg, const ModelParams& p) {
  Dop853<42, VariationalRhs> stepper(VariationalRhs{p}, cfg.control());
  stepper.initialize(pack(VariationalState::start(z0)), 0.0);
  std::vector<double> out;
  out.reserve(times.size());
  auto eval = [](const Packed42& s) {
    const Eigen::Map<const Matrix6> phi(s.data() + 6);
    return 2.0 * (s[kRe0] * phi(kRe0, kIm0) + s[kIm0] * phi(kIm0, kIm0));
  };
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(eval(pack(VariationalState::start(z0))));
      continue;
    }
    while (stepper.time() < t) stepper.step(times.back());
    out.push_back(eval(stepper.interpolate(t)));
  }
  return out;
}

/// Same derivative from two trajectories separated by d0 in Im zeta0.
inline std::vector<double> rho0_derivative_pair(const ClassicalState& z0, double d0, const std::vector<double>& times,
                                                const IntegratorConfig& cfg, const ModelParams& p) {
  std::array<double, 12> y;
  const Real6 a = to_real(z0);
  for (int i = 0; i < 6; ++i) y[i] = y[6 + i] = a[i];
  y[6 + kIm0] += d0;
  Dop853<12, PairRhs> stepper(PairRhs{p}, cfg.control());
  stepper.initialize(y, 0.0);
  auto eval = [d0](const std::array<double, 12>& s) {
    const double r_ref = s[kRe0] * s[kRe0] + s[kIm0] * s[kIm0];
    const double r_off = s[6 + kRe0] * s[6 + kRe0] + s[6 + kIm0] * s[6 + kIm0];
    return (r_off - r_ref) / d0;
  };
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(eval(y));
      continue;
    }
    while (stepper.time() < t) stepper.step(times.back());
    out.push_back(eval(stepper.interpolate(t)));
  }
  return out;
}

inline void require_times(const std::vector<double>& times, const char* where) {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1])))
      throw ConfigError(std::string(where) + ": times must be non-negative and strictly increasing");
}

inline std::vector<double> twa_otoc_terms(const std::vector<WignerSample>& samples, const std::vector<double>& times,
                                          const TwaConfig& cfg, double d0, const ModelParams& p, double hbar) {
  const std::size_t nt = times.size(), ns = samples.size();
  std::vector<double> terms(nt * ns);
  parallel_for(ns, [&](std::size_t k) {
    const ClassicalState z = real_zero_gauge(samples[k].zeta);
    const std::vector<double> d = cfg.derivative == DerivativeMethod::fundamental_matrix
                                      ? rho0_derivative_fundamental(z, times, cfg.integrator, p)
                                      : rho0_derivative_pair(z, d0, times, cfg.integrator, p);
    const double pre = 2.0 * z.zeta[kZero].real();
    for (std::size_t i = 0; i < nt; ++i) {
      const double v = hbar * pre * d[i];
      terms[i * ns + k] = v * v;
    }
  });
  return terms;
}

}  // namespace detail

/// C(t) = hbar^2 < |2 Re zeta0(0) d rho0(t) / d Im zeta0(0)|^2 >_W.
inline OtocSeries twa_otoc(const ClassicalState& center, int n_atoms, const std::vector<double>& times,
                           const TwaConfig& cfg, const ModelParams& p) {
  detail::require_times(times, "twa_otoc");
  const auto samples = sample_wigner(center, n_atoms, cfg);
  const double hbar = cfg.hbar(n_atoms);
  const std::size_t nt = times.size(), ns = samples.size();
  const std::vector<double> terms = detail::twa_otoc_terms(samples, times, cfg, cfg.d0, p, hbar);

  OtocSeries out;
  out.times = times;
  out.v_label = "rho0";
  out.w_label = "rho0";
  for (std::size_t i = 0; i < nt; ++i) {
    const std::vector<double> col(terms.begin() + i * ns, terms.begin() + (i + 1) * ns);
    double m = 0.0;
    for (double v : col) m += v;
    out.values.push_back(m / ns);
    out.errors.push_back(bootstrap_error(col, cfg.bootstrap_resamples, derive_seed(cfg.seed ^ 0x070CULL, i)));
  }

  if (cfg.derivative == DerivativeMethod::two_trajectory && cfg.d0_check_horizon > 0.0) {
    const std::vector<double> half = detail::twa_otoc_terms(samples, times, cfg, 0.5 * cfg.d0, p, hbar);
    // C(0) = 0 exactly; the pair estimate there is O(d0^2) and carries no signal.
    for (std::size_t i = 0; i < nt && times[i] <= cfg.d0_check_horizon; ++i) {
      if (times[i] == 0.0) continue;
      double m = 0.0;
      for (std::size_t k = 0; k < ns; ++k) m += half[i * ns + k];
      m /= ns;
      const double ref = out.values[i];
      if (ref > 0.0 && std::abs(m - ref) > 0.01 * ref) {
        out.warnings.push_back("halving d0 changes C(t) by more than 1% at t = " + std::to_string(times[i]));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Growth fits and scale matching
// ---------------------------------------------------------------------------

struct GrowthFit {
  double rate = 0.0;  // slope of log C against t
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual of log C
  double power_exponent = 0.0;  // slope of log C against log t
  double power_intercept = 0.0;
  double power_residual = std::numeric_limits<double>::infinity();
  std::size_t n_points = 0;

  bool exponential_preferred() const { return residual < power_residual; }
};

namespace detail {
struct LineFit {
  double slope, intercept, rms;
};
inline LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw NumericalError("line fit: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}
}  // namespace detail

/// Least-squares line through log C(t) on [t_lo, t_hi], with a power-law fit
/// log C = a + k log t on the same points for comparison.
inline GrowthFit otoc_growth_fit(const OtocSeries& s, double t_lo, double t_hi) {
  if (!(t_hi > t_lo)) throw ConfigError("otoc_growth_fit: window must satisfy t_lo < t_hi");
  std::vector<double> t, logc;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (s.times[i] < t_lo || s.times[i] > t_hi) continue;
    if (!(s.values[i] > 0.0)) throw DomainError("otoc_growth_fit: non-positive C(t) inside the window");
    t.push_back(s.times[i]);
    logc.push_back(std::log(s.values[i]));
  }
  if (t.size() < 3) throw ConfigError("otoc_growth_fit: fewer than 3 points inside the window");
  GrowthFit g;
  g.n_points = t.size();
  const auto e = detail::line_fit(t, logc);
  g.rate = e.slope;
  g.intercept = e.intercept;
  g.residual = e.rms;
  if (t.front() > 0.0) {
    std::vector<double> logt;
    for (double v : t) logt.push_back(std::log(v));
    const auto pw = detail::line_fit(logt, logc);
    g.power_exponent = pw.slope;
    g.power_intercept = pw.intercept;
    g.power_residual = pw.rms;
  }
  return g;
}

struct ScaleFit {
  double scale = 1.0;
  double relative_l2 = 0.0;
};

/// Single factor s minimising || s a - b ||, and the relative error against b.
inline ScaleFit fit_scale(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ConfigError("fit_scale: series lengths differ or are empty");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0) || !(bb > 0.0)) throw NumericalError("fit_scale: all-zero series");
  ScaleFit f;
  f.scale = ab / aa;
  double rr = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rr += (f.scale * a[i] - b[i]) * (f.scale * a[i] - b[i]);
  f.relative_l2 = std::sqrt(rr / bb);
  return f;
}

}  // namespace trimode

#endif  // TRIMODE_TWA_HPP
