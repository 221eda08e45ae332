#ifndef TRIMODE_QUANTUM_HPP
#define TRIMODE_QUANTUM_HPP

// Exact finite-N quantum mechanics of the three-mode model: Fock basis,
// Hamiltonian, exchange-parity blocks, dense diagonalisation, spectral time
// evolution, coherent states, Husimi rasters, OTOCs and the
// forward/kick/backward quadratic-response protocol.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <lapacke.h>

#include "trimode/error.hpp"
#include "trimode/model.hpp"
#include "trimode/parallel.hpp"

namespace trimode {

using VectorXc = Eigen::VectorXcd;
using SparseReal = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// Fock basis
// ---------------------------------------------------------------------------

struct FockState {
  int n_plus = 0;
  int n_zero = 0;
  int n_minus = 0;
  bool operator==(const FockState&) const = default;
};

/// All (n+, n0, n-) with n+ + n0 + n- = N, ordered lexicographically in (n+, n0).
class FockBasis {
 public:
  static constexpr std::size_t kDefaultCap = std::size_t{1} << 21;

  explicit FockBasis(int n_atoms, std::size_t cap = kDefaultCap) : n_atoms_(n_atoms) {
    if (n_atoms < 1) throw ConfigError("FockBasis: N must be >= 1");
    const std::size_t dim = dimension(n_atoms);
    if (dim > cap)
      throw ResourceError("FockBasis: dimension " + std::to_string(dim) + " exceeds cap " +
                          std::to_string(cap));
    offsets_.resize(static_cast<std::size_t>(n_atoms) + 2);
    states_.reserve(dim);
    std::size_t off = 0;
    for (int n1 = 0; n1 <= n_atoms; ++n1) {
      offsets_[n1] = off;
      for (int n0 = 0; n0 <= n_atoms - n1; ++n0) states_.push_back({n1, n0, n_atoms - n1 - n0});
      off += static_cast<std::size_t>(n_atoms - n1 + 1);
    }
    offsets_[n_atoms + 1] = off;
  }

  static std::size_t dimension(int n_atoms) {
    const auto n = static_cast<std::size_t>(n_atoms);
    return (n + 1) * (n + 2) / 2;
  }

  int n_atoms() const { return n_atoms_; }
  std::size_t size() const { return states_.size(); }
  const FockState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<FockState>& states() const { return states_; }

  std::size_t index(int n_plus, int n_zero) const { return offsets_[n_plus] + static_cast<std::size_t>(n_zero); }
  std::size_t index(const FockState& s) const { return index(s.n_plus, s.n_zero); }

  /// Index of the state with the two side modes exchanged.
  std::size_t mirror(std::size_t i) const {
    const FockState& s = states_[i];
    return index(s.n_minus, s.n_zero);
  }

 private:
  int n_atoms_;
  std::vector<std::size_t> offsets_;
  std::vector<FockState> states_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline BasisPtr build_basis(int n_atoms, std::size_t cap = FockBasis::kDefaultCap) {
  return std::make_shared<const FockBasis>(n_atoms, cap);
}

struct QuantumState {
  BasisPtr basis;
  VectorXc amplitudes;

  static constexpr double kNormTol = 1e-10;

  double norm() const { return amplitudes.norm(); }
  void require_normalized(const char* where) const {
    if (std::abs(norm() - 1.0) > kNormTol)
      throw DomainError(std::string(where) + ": quantum state is not normalized");
  }
};

inline QuantumState fock_state(const BasisPtr& basis, const FockState& s) {
  if (s.n_plus < 0 || s.n_zero < 0 || s.n_minus < 0 || s.n_plus + s.n_zero + s.n_minus != basis->n_atoms())
    throw DomainError("fock_state: occupations do not match the basis");
  QuantumState psi{basis, VectorXc::Zero(static_cast<Eigen::Index>(basis->size()))};
  psi.amplitudes[static_cast<Eigen::Index>(basis->index(s))] = 1.0;
  return psi;
}

// ---------------------------------------------------------------------------
// Hamiltonian and operators
// ---------------------------------------------------------------------------

struct HamiltonianMatrix {
  BasisPtr basis;
  ModelParams params;
  SparseReal matrix;  // real symmetric in the Fock basis

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }

  double hermiticity_error() const {
    const SparseReal diff = matrix - SparseReal(matrix.transpose());
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SparseReal::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
  }
};

inline HamiltonianMatrix build_hamiltonian(const BasisPtr& basis, const ModelParams& p) {
  p.validate();
  if (p.n_atoms != basis->n_atoms()) throw ConfigError("build_hamiltonian: ModelParams.n_atoms differs from basis N");
  const double g = p.pair_coupling();
  const double c = p.r / kSqrt2;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis->size() * 7);
  auto add_pair = [&](std::size_t i, std::size_t j, double v) {
    trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    trip.emplace_back(static_cast<int>(j), static_cast<int>(i), v);
  };
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto [n1, n0, nm] = (*basis)[i];
    const double d1 = n1, d0 = n0, dm = nm;
    const double diag = g * (d0 * (d1 + dm) + 0.5 * (d1 - dm) * (d1 - dm)) + p.q * (d1 + dm);
    if (diag != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    // a0+ a0+ a1 a-1 and its conjugate
    if (n1 > 0 && nm > 0 && g != 0.0)
      add_pair(basis->index(n1 - 1, n0 + 2), i, g * std::sqrt(d1 * dm * (d0 + 1.0) * (d0 + 2.0)));
    // (a1+ + a-1+) a0 and its conjugate
    if (n0 > 0 && c != 0.0) {
      add_pair(basis->index(n1 + 1, n0 - 1), i, c * std::sqrt((d1 + 1.0) * d0));
      add_pair(basis->index(n1, n0 - 1), i, c * std::sqrt((dm + 1.0) * d0));
    }
  }
  HamiltonianMatrix h{basis, p, SparseReal(static_cast<Eigen::Index>(basis->size()),
                                           static_cast<Eigen::Index>(basis->size()))};
  h.matrix.setFromTriplets(trip.begin(), trip.end());
  h.matrix.makeCompressed();
  return h;
}

/// Observable in the Fock basis. Lower-case labels are divided by N.
struct Operator {
  std::string label;
  SparseReal matrix;
};

inline const std::vector<std::string>& operator_labels() {
  static const std::vector<std::string> labels{"N0", "N1", "Nm1", "Sz", "Sx", "rho0", "sz", "sx"};
  return labels;
}

inline Operator make_operator(const std::string& label, const BasisPtr& basis) {
  const auto dim = static_cast<Eigen::Index>(basis->size());
  std::string raw = label;
  double scale = 1.0;
  if (label == "rho0") raw = "N0";
  if (label == "sz") raw = "Sz";
  if (label == "sx") raw = "Sx";
  if (raw != label) scale = 1.0 / basis->n_atoms();

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto [n1, n0, nm] = (*basis)[i];
    const int ii = static_cast<int>(i);
    if (raw == "N0") {
      trip.emplace_back(ii, ii, scale * n0);
    } else if (raw == "N1") {
      trip.emplace_back(ii, ii, scale * n1);
    } else if (raw == "Nm1") {
      trip.emplace_back(ii, ii, scale * nm);
    } else if (raw == "Sz") {
      trip.emplace_back(ii, ii, scale * (n1 - nm));
    } else if (raw == "Sx") {
      // [a0+ (a1 + a-1) + h.c.] / sqrt2
      if (n0 > 0) {
        const double v1 = scale * std::sqrt((n1 + 1.0) * n0) / kSqrt2;
        const double vm = scale * std::sqrt((nm + 1.0) * n0) / kSqrt2;
        const int j1 = static_cast<int>(basis->index(n1 + 1, n0 - 1));
        const int jm = static_cast<int>(basis->index(n1, n0 - 1));
        trip.emplace_back(j1, ii, v1);
        trip.emplace_back(ii, j1, v1);
        trip.emplace_back(jm, ii, vm);
        trip.emplace_back(ii, jm, vm);
      }
    } else {
      throw ConfigError("make_operator: unknown operator label '" + label + "'");
    }
  }
  Operator op{label, SparseReal(dim, dim)};
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

inline VectorXc apply_op(const SparseReal& m, const VectorXc& v) {
  VectorXc out(v.size());
  out.real() = m * v.real();
  out.imag() = m * v.imag();
  return out;
}

inline double expectation(const SparseReal& m, const VectorXc& v) { return v.dot(apply_op(m, v)).real(); }

/// exp(-i phi A) v by a scaled Taylor series; A real symmetric.
inline VectorXc expm_action(const SparseReal& a, double phi, const VectorXc& v) {
  double norm1 = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    double col = 0.0;
    for (SparseReal::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(phi) * norm1 / 0.5)));
  const std::complex<double> coef(0.0, -phi / steps);
  VectorXc out = v;
  for (int s = 0; s < steps; ++s) {
    VectorXc term = out;
    VectorXc acc = out;
    for (int k = 1; k < 60; ++k) {
      term = apply_op(a, term) * (coef / static_cast<double>(k));
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    out = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exchange parity blocks and diagonalisation
// ---------------------------------------------------------------------------

enum class Parity { even = 0, odd = 1 };

inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

struct ParityBlock {
  Parity parity = Parity::even;
  SparseReal embed;        // full_dim x block_dim, orthonormal columns
  Eigen::MatrixXd matrix;  // dense block of H
};

struct ParityBlocks {
  BasisPtr basis;
  std::array<ParityBlock, 2> blocks;
  double off_block_residual = 0.0;  // max |even^T H odd|

  std::size_t dimension(Parity p) const { return static_cast<std::size_t>(blocks[static_cast<int>(p)].embed.cols()); }
};

/// Orthonormal embeddings of the even and odd sectors under n+ <-> n-.
inline std::array<SparseReal, 2> parity_embeddings(const FockBasis& basis) {
  std::vector<Eigen::Triplet<double>> even, odd;
  int ne = 0, no = 0;
  const double h = 1.0 / kSqrt2;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const std::size_t j = basis.mirror(i);
    if (j == i) {
      even.emplace_back(static_cast<int>(i), ne++, 1.0);
    } else if (i < j) {
      even.emplace_back(static_cast<int>(i), ne, h);
      even.emplace_back(static_cast<int>(j), ne++, h);
      odd.emplace_back(static_cast<int>(i), no, h);
      odd.emplace_back(static_cast<int>(j), no++, -h);
    }
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::array<SparseReal, 2> out{SparseReal(dim, ne), SparseReal(dim, no)};
  out[0].setFromTriplets(even.begin(), even.end());
  out[1].setFromTriplets(odd.begin(), odd.end());
  return out;
}

inline constexpr Eigen::Index kDenseSolveCap = 6000;

inline ParityBlocks parity_blocks(const HamiltonianMatrix& h) {
  ParityBlocks pb;
  pb.basis = h.basis;
  auto emb = parity_embeddings(*h.basis);
  for (int b = 0; b < 2; ++b) {
    if (emb[b].cols() > kDenseSolveCap)
      throw ResourceError("parity_blocks: block dimension exceeds the dense-solve cap");
    pb.blocks[b].parity = static_cast<Parity>(b);
    const SparseReal blk = emb[b].transpose() * h.matrix * emb[b];
    pb.blocks[b].matrix = Eigen::MatrixXd(blk);
    pb.blocks[b].embed = std::move(emb[b]);
  }
  const SparseReal cross = pb.blocks[0].embed.transpose() * h.matrix * pb.blocks[1].embed;
  for (int k = 0; k < cross.outerSize(); ++k)
    for (SparseReal::InnerIterator it(cross, k); it; ++it)
      pb.off_block_residual = std::max(pb.off_block_residual, std::abs(it.value()));
  return pb;
}

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns; empty when not requested
};

/// Dense real-symmetric eigensolver (LAPACK divide and conquer).
inline SymmetricEigen symmetric_eigen(Eigen::MatrixXd a, bool want_vectors) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DomainError("symmetric_eigen: matrix is not square");
  if (n > kDenseSolveCap) throw ResourceError("symmetric_eigen: dimension exceeds the dense-solve cap");
  SymmetricEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'U',
                                         static_cast<lapack_int>(n), a.data(),
                                         static_cast<lapack_int>(n), out.values.data());
  if (info != 0) throw NumericalError("symmetric_eigen: LAPACK dsyevd failed with info " + std::to_string(info));
  if (want_vectors) out.vectors = std::move(a);
  return out;
}

struct BlockSpectrum {
  Parity parity = Parity::even;
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // block coordinates
  SparseReal embed;
};

struct Spectrum {
  BasisPtr basis;
  std::array<BlockSpectrum, 2> blocks;
  bool has_vectors = false;

  std::size_t size() const { return static_cast<std::size_t>(blocks[0].values.size() + blocks[1].values.size()); }

  std::vector<double> sorted_values() const {
    std::vector<double> all;
    for (const auto& b : blocks) all.insert(all.end(), b.values.data(), b.values.data() + b.values.size());
    std::sort(all.begin(), all.end());
    return all;
  }
};

inline Spectrum diagonalize(const ParityBlocks& pb, bool want_vectors = true) {
  Spectrum s;
  s.basis = pb.basis;
  s.has_vectors = want_vectors;
  for (int b = 0; b < 2; ++b) {
    SymmetricEigen e = symmetric_eigen(pb.blocks[b].matrix, want_vectors);
    s.blocks[b].parity = pb.blocks[b].parity;
    s.blocks[b].values = std::move(e.values);
    s.blocks[b].vectors = std::move(e.vectors);
    s.blocks[b].embed = pb.blocks[b].embed;
  }
  return s;
}

/// Eigenvalues of the unblocked Hamiltonian; the cross-check for the blocks.
inline std::vector<double> full_spectrum(const HamiltonianMatrix& h) {
  const SymmetricEigen e = symmetric_eigen(h.dense(), false);
  return {e.values.data(), e.values.data() + e.values.size()};
}

// ---------------------------------------------------------------------------
// Spectral propagation
// ---------------------------------------------------------------------------

/// Coordinates in the concatenated (even, odd) eigenbasis.
class Propagator {
 public:
  explicit Propagator(std::shared_ptr<const Spectrum> spectrum) : s_(std::move(spectrum)) {
    if (!s_->has_vectors) throw ConfigError("Propagator: spectrum was computed without eigenvectors");
    energies_.resize(static_cast<Eigen::Index>(s_->size()));
    energies_ << s_->blocks[0].values, s_->blocks[1].values;
  }

  const Spectrum& spectrum() const { return *s_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  std::size_t dimension() const { return s_->size(); }

  /// Columns of psi (Fock basis) to eigenbasis coefficients.
  Eigen::MatrixXcd to_eigen(const Eigen::MatrixXcd& psi) const {
    const Eigen::Index cols = psi.cols();
    Eigen::MatrixXd split(psi.rows(), 2 * cols);
    split << psi.real(), psi.imag();
    Eigen::MatrixXcd out(energies_.size(), cols);
    Eigen::Index row = 0;
    for (const auto& b : s_->blocks) {
      const Eigen::MatrixXd coords = b.vectors.transpose() * (b.embed.transpose() * split);
      const Eigen::Index n = b.values.size();
      out.middleRows(row, n).real() = coords.leftCols(cols);
      out.middleRows(row, n).imag() = coords.rightCols(cols);
      row += n;
    }
    return out;
  }

  Eigen::MatrixXcd from_eigen(const Eigen::MatrixXcd& c) const {
    const Eigen::Index cols = c.cols();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s_->basis->size()), 2 * cols);
    Eigen::Index row = 0;
    for (const auto& b : s_->blocks) {
      const Eigen::Index n = b.values.size();
      Eigen::MatrixXd split(n, 2 * cols);
      split << c.middleRows(row, n).real(), c.middleRows(row, n).imag();
      acc += b.embed * (b.vectors * split);
      row += n;
    }
    return acc.leftCols(cols) + std::complex<double>(0.0, 1.0) * acc.rightCols(cols);
  }

  /// Multiply eigen-coefficients by exp(-i E t).
  void phase(Eigen::MatrixXcd& c, double t) const {
    for (Eigen::Index k = 0; k < c.rows(); ++k) c.row(k) *= std::polar(1.0, -energies_[k] * t);
  }

  Eigen::MatrixXcd evolve(const Eigen::MatrixXcd& psi, double t) const {
    if (t == 0.0) return psi;
    Eigen::MatrixXcd c = to_eigen(psi);
    phase(c, t);
    return from_eigen(c);
  }

  VectorXc evolve(const VectorXc& psi, double t) const {
    return evolve(Eigen::MatrixXcd(psi), t).col(0);
  }

 private:
  std::shared_ptr<const Spectrum> s_;
  Eigen::VectorXd energies_;
};

inline QuantumState evolve(const QuantumState& psi, const Propagator& u, double t) {
  psi.require_normalized("evolve");
  return {psi.basis, u.evolve(psi.amplitudes, t)};
}

/// Basis, Hamiltonian, blocks and eigen-decomposition for one parameter set.
struct QuantumSystem {
  ModelParams params;
  BasisPtr basis;
  HamiltonianMatrix hamiltonian;
  std::shared_ptr<const Spectrum> spectrum;
  std::shared_ptr<const Propagator> propagator;

  static QuantumSystem build(const ModelParams& p, bool want_vectors = true) {
    QuantumSystem qs;
    qs.params = p;
    qs.basis = build_basis(p.n_atoms);
    qs.hamiltonian = build_hamiltonian(qs.basis, p);
    qs.spectrum = std::make_shared<const Spectrum>(diagonalize(parity_blocks(qs.hamiltonian), want_vectors));
    if (want_vectors) qs.propagator = std::make_shared<const Propagator>(qs.spectrum);
    return qs;
  }

  const Propagator& u() const {
    if (!propagator) throw ConfigError("QuantumSystem: built without eigenvectors");
    return *propagator;
  }
};

/// Weight of psi in the given parity sector.
inline double parity_weight(const QuantumState& psi, Parity p) {
  const auto emb = parity_embeddings(*psi.basis);
  const SparseReal& e = emb[static_cast<int>(p)];
  const Eigen::VectorXd re = e.transpose() * psi.amplitudes.real();
  const Eigen::VectorXd im = e.transpose() * psi.amplitudes.imag();
  return re.squaredNorm() + im.squaredNorm();
}

// ---------------------------------------------------------------------------
// Coherent states and Husimi distributions
// ---------------------------------------------------------------------------

namespace detail {
inline std::vector<double> log_multinomials(const FockBasis& basis) {
  const double lnf = std::lgamma(basis.n_atoms() + 1.0);
  std::vector<double> out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [n1, n0, nm] = basis[i];
    out[i] = lnf - std::lgamma(n1 + 1.0) - std::lgamma(n0 + 1.0) - std::lgamma(nm + 1.0);
  }
  return out;
}

// n log a with the convention 0 log 0 = 0.
inline double nlog(int n, double log_a) { return n == 0 ? 0.0 : n * log_a; }
}  // namespace detail

/// SU(3) coherent state: all N atoms in the single-particle mode zeta.
inline QuantumState coherent_state(const ClassicalState& z, const BasisPtr& basis) {
  z.require_normalized("coherent_state");
  const auto lm = detail::log_multinomials(*basis);
  std::array<double, 3> la, ph;
  for (int k = 0; k < 3; ++k) {
    la[k] = std::log(std::abs(z.zeta[k]));
    ph[k] = std::arg(z.zeta[k]);
  }
  QuantumState psi{basis, VectorXc(static_cast<Eigen::Index>(basis->size()))};
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto [n1, n0, nm] = (*basis)[i];
    const double logmag = 0.5 * lm[i] + detail::nlog(n1, la[0]) + detail::nlog(n0, la[1]) + detail::nlog(nm, la[2]);
    psi.amplitudes[static_cast<Eigen::Index>(i)] = std::polar(std::exp(logmag), n1 * ph[0] + n0 * ph[1] + nm * ph[2]);
  }
  // Exact up to rounding; renormalise the accumulated error away.
  psi.amplitudes.normalize();
  return psi;
}

/// |<zeta|psi>|^2
inline double husimi_value(const QuantumState& psi, const ClassicalState& z) {
  const QuantumState c = coherent_state(z, psi.basis);
  return std::norm(c.amplitudes.dot(psi.amplitudes));
}

inline std::vector<double> husimi_m_grid(double rho0, int m_grid_size) {
  const double side = std::max(1.0 - rho0, 0.0);
  if (side < CanonicalCoords::kPopulationTol || m_grid_size == 1) return {0.0};
  std::vector<double> m(static_cast<std::size_t>(m_grid_size));
  for (int k = 0; k < m_grid_size; ++k) m[k] = -side + 2.0 * side * k / (m_grid_size - 1);
  return m;
}

/// Per-m overlaps |<zeta(rho0, theta_s, m, theta_m)|psi>|^2 along the m-grid.
inline std::vector<double> husimi_m_profile(const QuantumState& psi, double rho0, double theta_s,
                                            double theta_m, int m_grid_size = 101) {
  std::vector<double> out;
  for (double m : husimi_m_grid(rho0, m_grid_size))
    out.push_back(husimi_value(psi, canonical_to_zeta(CanonicalCoords::make(rho0, theta_s, m, theta_m))));
  return out;
}

struct HusimiGrid {
  EnergyShellSpec grid;  // energy unused; theta_m_fixed sets the slice
  int m_grid_size = 101;
  bool max_normalized = false;
  std::vector<double> values;  // row-major (i over rho0, j over theta_s)

  double value(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n_theta_s + j]; }
  double total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

namespace detail {
/// Calls visit(i, j, m, Q) for every raster cell and m-grid point. Each rho0
/// row is handled by one worker, so visit may write to row-owned slots.
template <class Visit>
void husimi_visit(const QuantumState& psi, const EnergyShellSpec& grid, int m_grid_size, Visit&& visit) {
  psi.require_normalized("husimi");
  grid.validate();
  if (m_grid_size < 1) throw ConfigError("husimi: m_grid_size must be >= 1");
  const FockBasis& basis = *psi.basis;
  const int n = basis.n_atoms();
  const auto lm = log_multinomials(basis);
  const double tm = grid.theta_m_fixed;

  // For fixed (rho0, m) the overlap is a trigonometric polynomial in theta_s
  // with frequencies (n+ + n-)/2; collect its coefficients first.
  std::vector<std::complex<double>> larmor(basis.size());
  for (std::size_t s = 0; s < basis.size(); ++s)
    larmor[s] = std::polar(1.0, -0.5 * ((basis[s].n_plus - basis[s].n_minus) * tm));

  parallel_for(static_cast<std::size_t>(grid.n_rho0), [&](std::size_t i) {
    const double rho0 = grid.rho0_at(static_cast<int>(i));
    std::vector<std::complex<double>> coef(static_cast<std::size_t>(n) + 1);
    for (double m : husimi_m_grid(rho0, m_grid_size)) {
      const double l1 = 0.5 * std::log(std::max((1.0 - rho0 + m) / 2.0, 0.0));
      const double l0 = 0.5 * std::log(std::max(rho0, 0.0));
      const double lmi = 0.5 * std::log(std::max((1.0 - rho0 - m) / 2.0, 0.0));
      std::fill(coef.begin(), coef.end(), 0.0);
      for (std::size_t s = 0; s < basis.size(); ++s) {
        const auto [n1, n0, nm] = basis[s];
        const double logmag = 0.5 * lm[s] + nlog(n1, l1) + nlog(n0, l0) + nlog(nm, lmi);
        if (logmag < -745.0) continue;
        coef[static_cast<std::size_t>(n1 + nm)] += std::exp(logmag) * larmor[s] * psi.amplitudes[static_cast<Eigen::Index>(s)];
      }
      for (int j = 0; j < grid.n_theta_s; ++j) {
        const std::complex<double> step = std::polar(1.0, -0.5 * grid.theta_s_at(j));
        std::complex<double> acc = 0.0, ph = 1.0;
        for (int k = 0; k <= n; ++k) {
          acc += coef[static_cast<std::size_t>(k)] * ph;
          ph *= step;
        }
        visit(static_cast<int>(i), j, m, std::norm(acc));
      }
    }
  });
}
}  // namespace detail

/// m-summed Husimi values on the (rho0, theta_s) raster at theta_m = grid.theta_m_fixed.
inline HusimiGrid husimi_grid(const QuantumState& psi, const EnergyShellSpec& grid, int m_grid_size = 101,
                              bool normalize_max = false) {
  HusimiGrid out;
  out.grid = grid;
  out.m_grid_size = m_grid_size;
  out.max_normalized = normalize_max;
  out.values.assign(grid.size(), 0.0);
  detail::husimi_visit(psi, grid, m_grid_size, [&](int i, int j, double, double q) {
    out.values[static_cast<std::size_t>(i) * grid.n_theta_s + j] += q;
  });
  if (normalize_max) {
    const double mx = *std::max_element(out.values.begin(), out.values.end());
    if (mx > 0.0)
      for (double& v : out.values) v /= mx;
  }
  return out;
}

/// Fubini-Study distance arccos |<a|b>| between single-particle modes.
inline double mode_distance(const ClassicalState& a, const ClassicalState& b) {
  cplx ov = 0.0;
  for (int k = 0; k < 3; ++k) ov += std::conj(a.zeta[k]) * b.zeta[k];
  return std::acos(std::min(std::abs(ov), 1.0));
}

/// Fraction of the sampled Husimi mass (raster x m-grid at the slice
/// theta_m = grid.theta_m_fixed) whose mode lies within `radius` of `center`.
inline double husimi_mass_fraction(const QuantumState& psi, const EnergyShellSpec& grid, int m_grid_size,
                                   const ClassicalState& center, double radius) {
  std::vector<double> inside(static_cast<std::size_t>(grid.n_rho0), 0.0);
  std::vector<double> total(static_cast<std::size_t>(grid.n_rho0), 0.0);
  detail::husimi_visit(psi, grid, m_grid_size, [&](int i, int j, double m, double q) {
    const ClassicalState z =
        canonical_to_zeta(CanonicalCoords::make(grid.rho0_at(i), grid.theta_s_at(j), m, grid.theta_m_fixed));
    total[static_cast<std::size_t>(i)] += q;
    if (mode_distance(z, center) <= radius) inside[static_cast<std::size_t>(i)] += q;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    a += inside[i];
    b += total[i];
  }
  return b > 0.0 ? a / b : 0.0;
}

// ---------------------------------------------------------------------------
// OTOCs
// ---------------------------------------------------------------------------

struct OtocSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> errors;  // statistical error where applicable, else empty
  std::string v_label;
  std::string w_label;
  std::vector<std::string> warnings;
};

/// C(t) = || [W(t), V] psi ||^2 with W(t) = U(t)^dagger W U(t).
inline OtocSeries otoc_ed(const QuantumState& psi, const std::string& v_label, const std::string& w_label,
                          const std::vector<double>& times, const Propagator& u) {
  psi.require_normalized("otoc_ed");
  const Operator v = make_operator(v_label, psi.basis);
  const Operator w = make_operator(w_label, psi.basis);
  const Eigen::Index dim = psi.amplitudes.size();

  Eigen::MatrixXcd start(dim, 2);
  start.col(0) = apply_op(v.matrix, psi.amplitudes);
  start.col(1) = psi.amplitudes;
  const Eigen::MatrixXcd c0 = u.to_eigen(start);

  OtocSeries out;
  out.times = times;
  out.values.assign(times.size(), 0.0);
  out.v_label = v_label;
  out.w_label = w_label;
  parallel_for(times.size(), [&](std::size_t k) {
    const double t = times[k];
    Eigen::MatrixXcd c = c0;
    u.phase(c, t);
    Eigen::MatrixXcd x = u.from_eigen(c);
    x.col(0) = apply_op(w.matrix, x.col(0));
    x.col(1) = apply_op(w.matrix, x.col(1));
    Eigen::MatrixXcd y = u.to_eigen(x);
    u.phase(y, -t);
    x = u.from_eigen(y);
    // x.col(0) = W(t) V psi, x.col(1) = W(t) psi
    out.values[k] = (x.col(0) - apply_op(v.matrix, x.col(1))).squaredNorm();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic-response protocol
// ---------------------------------------------------------------------------

struct ProtocolSpec {
  std::string a_label = "Sx";  // kick generator
  std::string v_label = "N0";  // measured observable
  double phi = 1e-3;
  double lambda = 0.0;  // eigenvalue of V on the initial state

  static constexpr double kEigenTol = 1e-10;
};

struct ProtocolResult {
  OtocSeries series;
  std::vector<double> gamma_v;   // quadratic response of <V>
  std::vector<double> gamma_v2;  // quadratic response of <V^2>
};

/// Forward evolution, kick exp(-i phi A), evolution under -H, moments of V;
/// C = -2 Lambda Gamma_V + Gamma_{V^2} from a symmetric second difference.
inline ProtocolResult quadratic_response_protocol(const ProtocolSpec& spec, const QuantumState& psi,
                                                  const Propagator& u, const std::vector<double>& times) {
  psi.require_normalized("quadratic_response_protocol");
  if (!(spec.phi > 0.0)) throw ConfigError("quadratic_response_protocol: phi must be > 0");
  const Operator a = make_operator(spec.a_label, psi.basis);
  const Operator v = make_operator(spec.v_label, psi.basis);
  const VectorXc vpsi = apply_op(v.matrix, psi.amplitudes);
  const double residual = (vpsi - spec.lambda * psi.amplitudes).norm();
  if (residual >= ProtocolSpec::kEigenTol)
    throw DomainError("quadratic_response_protocol: initial state is not an eigenstate of " + spec.v_label +
                      " with the given Lambda (residual " + std::to_string(residual) + ")");

  ProtocolResult res;
  res.series.times = times;
  res.series.v_label = spec.v_label;
  res.series.w_label = spec.a_label;
  res.series.values.assign(times.size(), 0.0);
  res.gamma_v.assign(times.size(), 0.0);
  res.gamma_v2.assign(times.size(), 0.0);
  const double lam = spec.lambda;
  parallel_for(times.size(), [&](std::size_t k) {
    const double t = times[k];
    const VectorXc fwd = u.evolve(psi.amplitudes, t);
    std::array<double, 3> m1{}, m2{};
    const std::array<double, 3> phis{-spec.phi, 0.0, spec.phi};
    for (int s = 0; s < 3; ++s) {
      const VectorXc kicked = phis[s] == 0.0 ? fwd : expm_action(a.matrix, phis[s], fwd);
      const VectorXc back = u.evolve(kicked, -t);
      const VectorXc vb = apply_op(v.matrix, back);
      m1[s] = back.dot(vb).real();
      m2[s] = vb.squaredNorm();
    }
    const double denom = 2.0 * spec.phi * spec.phi;
    res.gamma_v[k] = (m1[0] + m1[2] - 2.0 * m1[1]) / denom;
    res.gamma_v2[k] = (m2[0] + m2[2] - 2.0 * m2[1]) / denom;
    res.series.values[k] = -2.0 * lam * res.gamma_v[k] + res.gamma_v2[k];
  });
  return res;
}

}  // namespace trimode

#endif  // TRIMODE_QUANTUM_HPP
