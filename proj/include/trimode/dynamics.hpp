#ifndef TRIMODE_DYNAMICS_HPP
#define TRIMODE_DYNAMICS_HPP

// Mean-field equations of motion, their analytic Jacobian, the variational
// (fundamental-matrix) flow and trajectory integration with conservation
// monitoring. Everything is integrated in the real six-vector layout.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "trimode/dop853.hpp"
#include "trimode/model.hpp"

namespace trimode {

using Real6 = std::array<double, 6>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Right-hand side of i dzeta/dt = dH/dzeta^* in real coordinates.
inline void eom_rhs_real(const double* y, double* dy, const ModelParams& p) {
  const cplx z1(y[0], y[1]), z0(y[2], y[3]), zm(y[4], y[5]);
  const double p1 = std::norm(z1), p0 = std::norm(z0), pm = std::norm(zm);
  const double c = p.r / kSqrt2;
  const cplx g1 = p.q * z1 + p.gn * ((p1 + p0 - pm) * z1 + std::conj(zm) * z0 * z0) + c * z0;
  const cplx g0 = p.gn * ((p1 + pm) * z0 + 2.0 * std::conj(z0) * z1 * zm) + c * (z1 + zm);
  const cplx gm = p.q * zm + p.gn * ((pm + p0 - p1) * zm + std::conj(z1) * z0 * z0) + c * z0;
  // dzeta/dt = -i g
  dy[0] = g1.imag();
  dy[1] = -g1.real();
  dy[2] = g0.imag();
  dy[3] = -g0.real();
  dy[4] = gm.imag();
  dy[5] = -gm.real();
}

inline ClassicalState eom_rhs(const ClassicalState& z, const ModelParams& p) {
  const Real6 y = to_real(z);
  Real6 dy;
  eom_rhs_real(y.data(), dy.data(), p);
  return from_real(dy);
}

/// Analytic 6x6 Jacobian of eom_rhs_real.
inline Matrix6 eom_jacobian(const double* y, const ModelParams& p) {
  const cplx z1(y[0], y[1]), z0(y[2], y[3]), zm(y[4], y[5]);
  const double p1 = std::norm(z1), p0 = std::norm(z0), pm = std::norm(zm);
  const double s = p.gn;
  const double c = p.r / kSqrt2;
  const cplx z1c = std::conj(z1), z0c = std::conj(z0), zmc = std::conj(zm);

  // g_i depends on zeta and zeta^*: dg = A dzeta + B dzeta^*.
  cplx a[3][3], b[3][3];
  a[0][0] = p.q + s * (2.0 * p1 + p0 - pm);
  a[0][1] = s * (z0c * z1 + 2.0 * zmc * z0) + c;
  a[0][2] = -s * zmc * z1;
  b[0][0] = s * z1 * z1;
  b[0][1] = s * z0 * z1;
  b[0][2] = s * (z0 * z0 - zm * z1);

  a[1][0] = s * (z1c * z0 + 2.0 * z0c * zm) + c;
  a[1][1] = s * (p1 + pm);
  a[1][2] = s * (zmc * z0 + 2.0 * z0c * z1) + c;
  b[1][0] = s * z1 * z0;
  b[1][1] = 2.0 * s * z1 * zm;
  b[1][2] = s * zm * z0;

  a[2][2] = p.q + s * (2.0 * pm + p0 - p1);
  a[2][1] = s * (z0c * zm + 2.0 * z1c * z0) + c;
  a[2][0] = -s * z1c * zm;
  b[2][2] = s * zm * zm;
  b[2][1] = s * z0 * zm;
  b[2][0] = s * (z0 * z0 - z1 * zm);

  // d(dzeta)/dt = -i (A + B) dx + (A - B) dy
  const cplx minus_i(0.0, -1.0);
  Matrix6 jac;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const cplx cx = minus_i * (a[i][j] + b[i][j]);
      const cplx cy = a[i][j] - b[i][j];
      jac(2 * i, 2 * j) = cx.real();
      jac(2 * i, 2 * j + 1) = cy.real();
      jac(2 * i + 1, 2 * j) = cx.imag();
      jac(2 * i + 1, 2 * j + 1) = cy.imag();
    }
  }
  return jac;
}

/// Phase-space point plus fundamental matrix.
struct VariationalState {
  Real6 y{};
  Matrix6 phi = Matrix6::Identity();

  static VariationalState start(const ClassicalState& z) { return {to_real(z), Matrix6::Identity()}; }
};

inline VariationalState variational_rhs(const VariationalState& v, const ModelParams& p) {
  VariationalState d;
  eom_rhs_real(v.y.data(), d.y.data(), p);
  d.phi = eom_jacobian(v.y.data(), p) * v.phi;
  return d;
}

using Packed42 = std::array<double, 42>;

inline Packed42 pack(const VariationalState& v) {
  Packed42 out;
  std::copy(v.y.begin(), v.y.end(), out.begin());
  Eigen::Map<Matrix6>(out.data() + 6) = v.phi;
  return out;
}

inline VariationalState unpack(const Packed42& a) {
  VariationalState v;
  std::copy(a.begin(), a.begin() + 6, v.y.begin());
  v.phi = Eigen::Map<const Matrix6>(a.data() + 6);
  return v;
}

struct IntegratorConfig {
  // Defaults keep energy and norm drift near 1e-10 over t = 1000.
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  bool dense_output = true;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("IntegratorConfig: tolerances must be > 0");
    if (!(max_step > 0.0)) throw ConfigError("IntegratorConfig: max_step must be > 0");
  }
  StepControl control() const { return {rel_tol, abs_tol, max_step}; }
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<ClassicalState> states;
  double energy_drift = 0.0;  // max |E(t) - E(0)| / max(|E(0)|, 1)
  double norm_drift = 0.0;    // max | |zeta|^2 - 1 |
};

struct MeanFieldRhs {
  ModelParams params;
  void operator()(const Real6& y, Real6& dy, double) const { eom_rhs_real(y.data(), dy.data(), params); }
};

struct VariationalRhs {
  ModelParams params;
  void operator()(const Packed42& y, Packed42& dy, double) const {
    eom_rhs_real(y.data(), dy.data(), params);
    const Matrix6 jac = eom_jacobian(y.data(), params);
    Eigen::Map<Matrix6>(dy.data() + 6) = jac * Eigen::Map<const Matrix6>(y.data() + 6);
  }
};

/// Two trajectories advanced with one shared step sequence.
struct PairRhs {
  ModelParams params;
  void operator()(const std::array<double, 12>& y, std::array<double, 12>& dy, double) const {
    eom_rhs_real(y.data(), dy.data(), params);
    eom_rhs_real(y.data() + 6, dy.data() + 6, params);
  }
};

using MeanFieldStepper = Dop853<6, MeanFieldRhs>;

namespace detail {
inline void track_drift(TrajectoryRecord& rec, const ClassicalState& z, double e0,
                        const ModelParams& p) {
  const double scale = std::max(std::abs(e0), 1.0);
  rec.energy_drift = std::max(rec.energy_drift, std::abs(mf_energy(z, p) - e0) / scale);
  rec.norm_drift = std::max(rec.norm_drift, std::abs(z.norm2() - 1.0));
}
}  // namespace detail

/// Integrate the mean-field equations to t_end recording every accepted step.
inline TrajectoryRecord integrate(const ClassicalState& z0, double t_end, const IntegratorConfig& cfg,
                                  const ModelParams& p) {
  z0.require_normalized("integrate");
  cfg.validate();
  if (!(t_end >= 0.0)) throw ConfigError("integrate: t_end must be >= 0");
  TrajectoryRecord rec;
  const double e0 = mf_energy(z0, p);
  rec.times.push_back(0.0);
  rec.states.push_back(z0);
  MeanFieldStepper stepper(MeanFieldRhs{p}, cfg.control());
  stepper.initialize(to_real(z0), 0.0);
  while (stepper.time() < t_end) {
    stepper.step(t_end);
    const ClassicalState z = from_real(stepper.state());
    rec.times.push_back(stepper.time());
    rec.states.push_back(z);
    detail::track_drift(rec, z, e0, p);
  }
  return rec;
}

/// Integrate and sample the dense output at the requested (ascending) times.
inline TrajectoryRecord integrate_at(const ClassicalState& z0, const std::vector<double>& times,
                                     const IntegratorConfig& cfg, const ModelParams& p) {
  z0.require_normalized("integrate_at");
  cfg.validate();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1])))
      throw ConfigError("integrate_at: times must be non-negative and strictly increasing");
  }
  TrajectoryRecord rec;
  const double e0 = mf_energy(z0, p);
  MeanFieldStepper stepper(MeanFieldRhs{p}, cfg.control());
  stepper.initialize(to_real(z0), 0.0);
  std::size_t next = 0;
  auto emit_until = [&](double t_hi) {
    while (next < times.size() && times[next] <= t_hi) {
      const ClassicalState z = times[next] == 0.0 ? z0 : from_real(stepper.interpolate(times[next]));
      rec.times.push_back(times[next]);
      rec.states.push_back(z);
      ++next;
    }
  };
  emit_until(0.0);
  const double t_end = times.empty() ? 0.0 : times.back();
  while (stepper.time() < t_end) {
    stepper.step(t_end);
    detail::track_drift(rec, from_real(stepper.state()), e0, p);
    emit_until(stepper.time());
  }
  return rec;
}

/// Final state after evolving for time t.
inline ClassicalState propagate(const ClassicalState& z0, double t, const IntegratorConfig& cfg,
                                const ModelParams& p) {
  if (t == 0.0) return z0;
  MeanFieldStepper stepper(MeanFieldRhs{p}, cfg.control());
  stepper.initialize(to_real(z0), 0.0);
  while (stepper.time() < t) stepper.step(t);
  return from_real(stepper.state());
}

/// Evolve the fundamental matrix alongside the trajectory up to time t.
inline VariationalState propagate_variational(const VariationalState& v0, double t,
                                              const IntegratorConfig& cfg, const ModelParams& p) {
  if (t == 0.0) return v0;
  Dop853<42, VariationalRhs> stepper(VariationalRhs{p}, cfg.control());
  stepper.initialize(pack(v0), 0.0);
  while (stepper.time() < t) stepper.step(t);
  return unpack(stepper.state());
}

}  // namespace trimode

#endif  // TRIMODE_DYNAMICS_HPP
