#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "trimode/quantum.hpp"

using namespace trimode;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

namespace {

ClassicalState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ClassicalState z{{cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng))}};
  return z.normalized();
}

// Brute-force model on the full (N+1)^3 product space of three truncated
// oscillators, projected onto the fixed-N sector in the library's ordering.
struct DenseOracle {
  int n;
  BasisPtr basis;
  MatrixXd proj;  // product_dim x sector_dim
  MatrixXd a1, a0, am;

  explicit DenseOracle(int n_atoms) : n(n_atoms), basis(build_basis(n_atoms)) {
    const int d = n + 1;
    MatrixXd a = MatrixXd::Zero(d, d);
    for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const MatrixXd id = MatrixXd::Identity(d, d);
    a1 = Eigen::kroneckerProduct(a, Eigen::kroneckerProduct(id, id)).eval();
    a0 = Eigen::kroneckerProduct(id, Eigen::kroneckerProduct(a, id)).eval();
    am = Eigen::kroneckerProduct(id, Eigen::kroneckerProduct(id, a)).eval();
    proj = MatrixXd::Zero(d * d * d, static_cast<Eigen::Index>(basis->size()));
    for (std::size_t i = 0; i < basis->size(); ++i) {
      const auto [n1, n0, nm] = (*basis)[i];
      proj(n1 * d * d + n0 * d + nm, static_cast<Eigen::Index>(i)) = 1.0;
    }
  }

  MatrixXd sector(const MatrixXd& big) const { return proj.transpose() * big * proj; }

  MatrixXd hamiltonian(const ModelParams& p) const {
    const double g = p.gn / n, c = p.r / std::sqrt(2.0);
    const MatrixXd n1 = a1.transpose() * a1, n0 = a0.transpose() * a0, nm = am.transpose() * am;
    const MatrixXd pair = a0.transpose() * a0.transpose() * a1 * am;
    const MatrixXd rf = (a1.transpose() + am.transpose()) * a0;
    const MatrixXd big = g * (pair + pair.transpose()) + g * (n0 * (n1 + nm) + 0.5 * (n1 - nm) * (n1 - nm)) +
                         p.q * (n1 + nm) + c * (rf + rf.transpose());
    return sector(big);
  }

  MatrixXd op(const std::string& label) const {
    const MatrixXd n1 = a1.transpose() * a1, n0 = a0.transpose() * a0, nm = am.transpose() * am;
    const MatrixXd sx = (a0.transpose() * (a1 + am) + (a1 + am).transpose() * a0) / std::sqrt(2.0);
    if (label == "N0") return sector(n0);
    if (label == "rho0") return sector(n0) / n;
    if (label == "Sz") return sector(n1 - nm);
    if (label == "sx") return sector(sx) / n;
    if (label == "Sx") return sector(sx);
    throw std::logic_error("oracle: no operator " + label);
  }
};

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(FockBasis, Dimensions) {
  EXPECT_EQ(build_basis(1)->size(), 3u);
  EXPECT_EQ(build_basis(2)->size(), 6u);
  EXPECT_EQ(build_basis(100)->size(), 5151u);
  EXPECT_THROW(build_basis(0), ConfigError);
  EXPECT_THROW(build_basis(3000, 1000), ResourceError);
}

TEST(FockBasis, OrderingAndIndexMaps) {
  const auto b = build_basis(7);
  for (std::size_t i = 0; i < b->size(); ++i) {
    const FockState& s = (*b)[i];
    ASSERT_EQ(s.n_plus + s.n_zero + s.n_minus, 7);
    ASSERT_EQ(b->index(s), i);
    const std::size_t j = b->mirror(i);
    ASSERT_EQ((*b)[j].n_plus, s.n_minus);
    ASSERT_EQ(b->mirror(j), i);
    if (i > 0) {
      const FockState& r = (*b)[i - 1];
      ASSERT_TRUE(r.n_plus < s.n_plus || (r.n_plus == s.n_plus && r.n_zero < s.n_zero));
    }
  }
}

TEST(Hamiltonian, MatchesBruteForceConstruction) {
  for (int n : {1, 2, 3}) {
    const DenseOracle o(n);
    for (double r : {0.0, 0.15, 0.5}) {
      const ModelParams p{1.3, 0.7, r, n};
      const HamiltonianMatrix h = build_hamiltonian(o.basis, p);
      ASSERT_LT(max_abs(h.dense() - o.hamiltonian(p)), 1e-8) << "N=" << n << " r=" << r;
      ASSERT_LT(h.hermiticity_error(), 1e-12);
    }
  }
}

TEST(Hamiltonian, KnownMatrixElements) {
  const int n = 40;
  const auto b = build_basis(n);
  const HamiltonianMatrix h = build_hamiltonian(b, ModelParams{1, 1, 0.3, n});
  const auto polar = b->index({0, n, 0});
  EXPECT_EQ(h.matrix.coeff(polar, polar), 0.0);
  EXPECT_NEAR(h.matrix.coeff(b->index({1, n - 2, 1}), polar), std::sqrt(n * (n - 1.0)) / n, 1e-14);
}

TEST(Hamiltonian, CommutesWithSzWithoutRf) {
  const auto b = build_basis(12);
  const HamiltonianMatrix h = build_hamiltonian(b, ModelParams{1, 1, 0, 12});
  const MatrixXd sz(make_operator("Sz", b).matrix);
  EXPECT_LT(max_abs(h.dense() * sz - sz * h.dense()), 1e-12);
  const HamiltonianMatrix hr = build_hamiltonian(b, ModelParams{1, 1, 0.2, 12});
  EXPECT_GT(max_abs(hr.dense() * sz - sz * hr.dense()), 1e-3);
}

TEST(Hamiltonian, RejectsMismatchedAtomNumber) {
  EXPECT_THROW(build_hamiltonian(build_basis(3), ModelParams{1, 1, 0, 4}), ConfigError);
}

TEST(Operators, MatchBruteForceAndRejectUnknownLabels) {
  const DenseOracle o(3);
  for (const std::string l : {"N0", "rho0", "Sz", "Sx", "sx"})
    EXPECT_LT(max_abs(MatrixXd(make_operator(l, o.basis).matrix) - o.op(l)), 1e-12) << l;
  EXPECT_THROW(make_operator("Sy", o.basis), ConfigError);
}

TEST(ParityBlocks, SmallDimensions) {
  for (auto [n, even, odd] : {std::tuple{1, 2u, 1u}, std::tuple{2, 4u, 2u}}) {
    const auto pb = parity_blocks(build_hamiltonian(build_basis(n), ModelParams{1, 1, 0.5, n}));
    EXPECT_EQ(pb.dimension(Parity::even), even);
    EXPECT_EQ(pb.dimension(Parity::odd), odd);
  }
}

TEST(ParityBlocks, BlockDiagonalAndComplete) {
  const int n = 30;
  const auto h = build_hamiltonian(build_basis(n), ModelParams{1, 1, 0.5, n});
  const auto pb = parity_blocks(h);
  EXPECT_EQ(pb.dimension(Parity::even) + pb.dimension(Parity::odd), h.basis->size());
  EXPECT_LT(pb.off_block_residual, 1e-12);
  const std::vector<double> blocks = diagonalize(pb, false).sorted_values();
  Eigen::SelfAdjointEigenSolver<MatrixXd> full(h.dense(), Eigen::EigenvaluesOnly);
  ASSERT_EQ(blocks.size(), static_cast<std::size_t>(full.eigenvalues().size()));
  for (std::size_t k = 0; k < blocks.size(); ++k) ASSERT_NEAR(blocks[k], full.eigenvalues()[k], 1e-8);
  const std::vector<double> lib_full = full_spectrum(h);
  for (std::size_t k = 0; k < blocks.size(); ++k) ASSERT_NEAR(blocks[k], lib_full[k], 1e-8);
}

TEST(ParityBlocks, DenseSolveCapIsEnforced) {
  const int n = 160;  // blocks of ~6500
  const auto h = build_hamiltonian(build_basis(n), ModelParams{1, 1, 0.5, n});
  EXPECT_THROW(parity_blocks(h), ResourceError);
  EXPECT_THROW(symmetric_eigen(MatrixXd(kDenseSolveCap + 1, 1), false), DomainError);
}

TEST(Diagonalize, SmallSpectraMatchOracle) {
  for (int n : {2, 3}) {
    const DenseOracle o(n);
    for (double r : {0.0, 0.5}) {
      const ModelParams p{1, 1, r, n};
      const Spectrum s = diagonalize(parity_blocks(build_hamiltonian(o.basis, p)));
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(o.hamiltonian(p), Eigen::EigenvaluesOnly);
      const auto v = s.sorted_values();
      for (std::size_t k = 0; k < v.size(); ++k) ASSERT_NEAR(v[k], es.eigenvalues()[k], 1e-8);
    }
  }
}

TEST(Diagonalize, EigenvectorsOrthonormalAndAscending) {
  const int n = 20;
  const Spectrum s = diagonalize(parity_blocks(build_hamiltonian(build_basis(n), ModelParams{1, 1, 0.5, n})));
  for (const auto& b : s.blocks) {
    const MatrixXd g = b.vectors.transpose() * b.vectors;
    EXPECT_LT(max_abs(g - MatrixXd::Identity(g.rows(), g.cols())), 1e-8);
    for (Eigen::Index k = 1; k < b.values.size(); ++k) ASSERT_LE(b.values[k - 1], b.values[k]);
  }
}

TEST(Diagonalize, MagnetizationSectorsWithoutRf) {
  const int n = 16;
  const auto b = build_basis(n);
  const Spectrum s = diagonalize(parity_blocks(build_hamiltonian(b, ModelParams{1, 1, 0, n})));
  const MatrixXd sz(make_operator("Sz", b).matrix);
  // Every degenerate eigenspace is invariant under Sz.
  MatrixXd vecs(b->size(), s.size());
  Eigen::VectorXd vals(s.size());
  Eigen::Index col = 0;
  for (const auto& blk : s.blocks) {
    vecs.middleCols(col, blk.values.size()) = MatrixXd(blk.embed) * blk.vectors;
    vals.segment(col, blk.values.size()) = blk.values;
    col += blk.values.size();
  }
  std::vector<Eigen::Index> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return vals[x] < vals[y]; });
  double worst = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && vals[order[hi]] - vals[order[hi - 1]] < 1e-9) ++hi;
    MatrixXd sub(vecs.rows(), static_cast<Eigen::Index>(hi - lo));
    for (std::size_t k = lo; k < hi; ++k) sub.col(static_cast<Eigen::Index>(k - lo)) = vecs.col(order[k]);
    const MatrixXd moved = sz * sub;
    worst = std::max(worst, (moved - sub * (sub.transpose() * moved)).cwiseAbs().maxCoeff());
    lo = hi;
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(CoherentState, PolarStateIsFockState) {
  const auto b = build_basis(10);
  const QuantumState psi = coherent_state(ClassicalState{}, b);
  EXPECT_LT((psi.amplitudes - fock_state(b, {0, 10, 0}).amplitudes).norm(), 1e-15);
}

TEST(CoherentState, MultinomialAmplitudesAndMoments) {
  std::mt19937_64 rng(1);
  const int n = 20;
  const auto b = build_basis(n);
  const ClassicalState z = random_state(rng);
  const QuantumState psi = coherent_state(z, b);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < b->size(); ++i) {
    const auto [n1, n0, nm] = (*b)[i];
    const double mult = std::tgamma(n + 1.0) / (std::tgamma(n1 + 1.0) * std::tgamma(n0 + 1.0) * std::tgamma(nm + 1.0));
    const cplx amp = std::sqrt(mult) * std::pow(z.zeta[0], n1) * std::pow(z.zeta[1], n0) * std::pow(z.zeta[2], nm);
    norm2 += std::norm(amp);
    ASSERT_NEAR(std::abs(psi.amplitudes[static_cast<Eigen::Index>(i)] - amp), 0.0, 1e-12);
  }
  EXPECT_NEAR(norm2, 1.0, 1e-12);
  EXPECT_NEAR(expectation(make_operator("N0", b).matrix, psi.amplitudes), n * z.population(kZero), 1e-8);
  EXPECT_NEAR(expectation(make_operator("Sz", b).matrix, psi.amplitudes), n * z.magnetization(), 1e-8);
}

TEST(CoherentState, NormalizedAtLargeN) {
  std::mt19937_64 rng(2);
  const auto b = build_basis(100);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(coherent_state(random_state(rng), b).norm(), 1.0, 1e-10);
  EXPECT_NEAR(coherent_state(canonical_to_zeta(CanonicalCoords::make(0, 0, 1, 0)), b).norm(), 1.0, 1e-10);
}

class Evolution : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { qs_ = new QuantumSystem(QuantumSystem::build(ModelParams{1, 1, 0.15, 24})); }
  static void TearDownTestSuite() { delete qs_; }
  static QuantumSystem* qs_;
};
QuantumSystem* Evolution::qs_ = nullptr;

TEST_F(Evolution, IdentityAtZeroAndUnitary) {
  std::mt19937_64 rng(3);
  const QuantumState psi = coherent_state(random_state(rng), qs_->basis);
  EXPECT_LT((evolve(psi, qs_->u(), 0.0).amplitudes - psi.amplitudes).norm(), 1e-15);
  for (double t : {0.3, 5.0, 80.0}) EXPECT_NEAR(evolve(psi, qs_->u(), t).norm(), 1.0, 1e-10);
}

TEST_F(Evolution, EigenstateOnlyAcquiresPhase) {
  const auto& blk = qs_->spectrum->blocks[1];
  const Eigen::VectorXd v = MatrixXd(blk.embed) * blk.vectors.col(3);
  const QuantumState psi{qs_->basis, v.cast<cplx>()};
  const QuantumState out = evolve(psi, qs_->u(), 7.5);
  const cplx ov = psi.amplitudes.dot(out.amplitudes);
  EXPECT_NEAR(std::abs(ov), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(ov - std::polar(1.0, -blk.values[3] * 7.5)), 0.0, 1e-9);
}

TEST_F(Evolution, EnergyAndParityConserved) {
  std::mt19937_64 rng(4);
  const QuantumState psi = coherent_state(random_state(rng), qs_->basis);
  const auto& h = qs_->hamiltonian.matrix;
  const double e0 = expectation(h, psi.amplitudes);
  const double w0 = parity_weight(psi, Parity::odd);
  for (double t : {1.0, 10.0, 50.0}) {
    const QuantumState s = evolve(psi, qs_->u(), t);
    EXPECT_NEAR(expectation(h, s.amplitudes), e0, 1e-10);
    EXPECT_NEAR(parity_weight(s, Parity::odd), w0, 1e-10);
  }
  // A parity-even state stays out of the odd block.
  const QuantumState even = coherent_state(ClassicalState{}, qs_->basis);
  EXPECT_LT(parity_weight(evolve(even, qs_->u(), 13.0), Parity::odd), 1e-10);
}

TEST_F(Evolution, MatchesMatrixExponential) {
  std::mt19937_64 rng(5);
  const QuantumState psi = coherent_state(random_state(rng), qs_->basis);
  const MatrixXcd h = qs_->hamiltonian.dense().cast<cplx>();
  const Eigen::VectorXcd ref = (cplx(0, -2.5) * h).exp() * psi.amplitudes;
  EXPECT_LT((evolve(psi, qs_->u(), 2.5).amplitudes - ref).norm(), 1e-9);
}

TEST(Husimi, PolarStateProfiles) {
  const auto b = build_basis(30);
  const QuantumState psi = fock_state(b, {0, 30, 0});
  const auto top = husimi_m_profile(psi, 1.0, 0.0, 0.0);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_NEAR(top[0], 1.0, 1e-12);
  for (double v : husimi_m_profile(psi, 0.0, 0.7, 0.0)) EXPECT_EQ(v, 0.0);
}

TEST(Husimi, GridKernelMatchesDirectOverlaps) {
  std::mt19937_64 rng(6);
  const int n = 15;
  const auto b = build_basis(n);
  const QuantumState psi = coherent_state(random_state(rng), b);
  EnergyShellSpec g;
  g.n_rho0 = 5;
  g.n_theta_s = 7;
  g.theta_m_fixed = 0.4;
  const int mg = 9;
  const HusimiGrid h = husimi_grid(psi, g, mg);
  for (int i = 0; i < g.n_rho0; ++i)
    for (int j = 0; j < g.n_theta_s; ++j) {
      double direct = 0.0;
      for (double v : husimi_m_profile(psi, g.rho0_at(i), g.theta_s_at(j), g.theta_m_fixed, mg)) direct += v;
      ASSERT_NEAR(h.value(i, j), direct, 1e-12);
      ASSERT_GE(h.value(i, j), 0.0);
    }
  const HusimiGrid hn = husimi_grid(psi, g, mg, true);
  EXPECT_NEAR(*std::max_element(hn.values.begin(), hn.values.end()), 1.0, 1e-15);
}

TEST(Husimi, SpreadShrinksAsInverseRootN) {
  const ClassicalState center = canonical_to_zeta(CanonicalCoords::make(0.5, 0.0, 0.0, 0.0));
  EnergyShellSpec g;
  g.n_rho0 = 81;
  g.n_theta_s = 5;
  g.rho0_min = 0.1;
  g.rho0_max = 0.9;
  g.theta_s_min = -0.05;
  g.theta_s_max = 0.05;
  auto spread = [&](int n) {
    const HusimiGrid h = husimi_grid(coherent_state(center, build_basis(n)), g, 201);
    double w = 0, m1 = 0, m2 = 0;
    for (int i = 0; i < g.n_rho0; ++i)
      for (int j = 0; j < g.n_theta_s; ++j) {
        const double x = g.rho0_at(i) - 0.5, q = h.value(i, j);
        w += q;
        m1 += q * x;
        m2 += q * x * x;
      }
    return std::sqrt(m2 / w - (m1 / w) * (m1 / w));
  };
  EXPECT_NEAR(spread(50) / spread(200), 2.0, 0.15);
}

TEST(Husimi, MassFractionOfCoherentStateConcentratesAtCenter) {
  const int n = 100;
  const ClassicalState c = canonical_to_zeta(CanonicalCoords::make(0.4, 1.0, 0.1, 0.0));
  const QuantumState psi = coherent_state(c, build_basis(n));
  EnergyShellSpec g;
  g.n_rho0 = 30;
  g.n_theta_s = 60;
  const double near = husimi_mass_fraction(psi, g, 41, c, 2.0 / std::sqrt(n));
  EXPECT_GT(near, 0.9);
  EXPECT_LE(near, 1.0);
  EXPECT_LT(husimi_mass_fraction(psi, g, 41, ClassicalState{}, 2.0 / std::sqrt(n)), 0.01);
}

TEST(OtocEd, MatchesDenseCommutatorAtSmallN) {
  const int n = 3;
  const DenseOracle o(n);
  std::mt19937_64 rng(7);
  for (double r : {0.0, 0.5}) {
    const ModelParams p{1, 1, r, n};
    const QuantumSystem qs = QuantumSystem::build(p);
    const MatrixXcd h = o.hamiltonian(p).cast<cplx>();
    const QuantumState psi = coherent_state(random_state(rng), qs.basis);
    const std::vector<double> times{0.0, 0.4, 1.7, 6.0};
    for (auto [vl, wl] : {std::pair{"rho0", "rho0"}, std::pair{"N0", "Sx"}}) {
      const OtocSeries s = otoc_ed(psi, vl, wl, times, qs.u());
      const MatrixXcd v = o.op(vl).cast<cplx>(), w = o.op(wl).cast<cplx>();
      for (std::size_t k = 0; k < times.size(); ++k) {
        const MatrixXcd u = (cplx(0, -times[k]) * h).exp();
        const MatrixXcd wt = u.adjoint() * w * u;
        const MatrixXcd comm = wt * v - v * wt;
        const double ref = psi.amplitudes.dot(comm.adjoint() * comm * psi.amplitudes).real();
        ASSERT_NEAR(s.values[k], ref, 1e-8) << vl << "," << wl << " t=" << times[k];
      }
    }
  }
}

TEST(OtocEd, ZeroAtEqualTimesAndNonNegative) {
  std::mt19937_64 rng(8);
  const QuantumSystem qs = QuantumSystem::build(ModelParams{1, 1, 0.15, 20});
  const QuantumState psi = coherent_state(random_state(rng), qs.basis);
  std::vector<double> t;
  for (int k = 0; k <= 40; ++k) t.push_back(0.25 * k);
  const OtocSeries s = otoc_ed(psi, "rho0", "rho0", t, qs.u());
  EXPECT_LT(s.values[0], 1e-12);
  for (double v : s.values) ASSERT_GE(v, -1e-12);
  EXPECT_GT(*std::max_element(s.values.begin(), s.values.end()), 1e-6);
  EXPECT_THROW(otoc_ed(psi, "rho0", "bogus", t, qs.u()), ConfigError);
}

TEST(ExpmAction, MatchesDenseExponential) {
  const DenseOracle o(3);
  const auto sx = make_operator("Sx", o.basis).matrix;
  std::mt19937_64 rng(9);
  const QuantumState psi = coherent_state(random_state(rng), o.basis);
  for (double phi : {1e-3, 0.3, 2.0}) {
    const Eigen::VectorXcd ref = (cplx(0, -phi) * o.op("Sx").cast<cplx>()).exp() * psi.amplitudes;
    EXPECT_LT((expm_action(sx, phi, psi.amplitudes) - ref).norm(), 1e-12);
  }
}

class Protocol : public ::testing::Test {
 protected:
  static constexpr int kN = 20;
  static void SetUpTestSuite() { qs_ = new QuantumSystem(QuantumSystem::build(ModelParams{1, 1, 0.15, kN})); }
  static void TearDownTestSuite() { delete qs_; }
  static QuantumSystem* qs_;
  ProtocolSpec spec(double phi) const {
    ProtocolSpec s;
    s.phi = phi;
    s.lambda = kN;
    return s;
  }
};
QuantumSystem* Protocol::qs_ = nullptr;

TEST_F(Protocol, MatchesSquaredCommutator) {
  const QuantumState psi = fock_state(qs_->basis, {0, kN, 0});
  const std::vector<double> t{0.0, 0.5, 1.0, 2.0, 3.5, 5.0};
  const ProtocolResult pr = quadratic_response_protocol(spec(1e-3), psi, qs_->u(), t);
  const OtocSeries ref = otoc_ed(psi, "N0", "Sx", t, qs_->u());
  for (std::size_t k = 0; k < t.size(); ++k)
    EXPECT_NEAR(pr.series.values[k], ref.values[k], 1e-2 * ref.values[k]) << "t=" << t[k];
  // At t = 0 the kick does not commute with N0: C(0) = || [Sx, N0] |0,N,0> ||^2 = N.
  EXPECT_NEAR(pr.series.values[0], kN, 1e-3 * kN);
}

TEST_F(Protocol, SecondOrderConvergenceInPhi) {
  const QuantumState psi = fock_state(qs_->basis, {0, kN, 0});
  const std::vector<double> t{1.0, 2.5};
  const OtocSeries ref = otoc_ed(psi, "N0", "Sx", t, qs_->u());
  const auto a = quadratic_response_protocol(spec(0.04), psi, qs_->u(), t);
  const auto b = quadratic_response_protocol(spec(0.02), psi, qs_->u(), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double ea = std::abs(a.series.values[k] - ref.values[k]);
    const double eb = std::abs(b.series.values[k] - ref.values[k]);
    EXPECT_NEAR(ea / eb, 4.0, 0.4) << "t=" << t[k];
  }
}

TEST_F(Protocol, RequiresEigenstate) {
  std::mt19937_64 rng(10);
  const QuantumState psi = coherent_state(random_state(rng), qs_->basis);
  EXPECT_THROW(quadratic_response_protocol(spec(1e-3), psi, qs_->u(), {1.0}), DomainError);
  const QuantumState fock = fock_state(qs_->basis, {0, kN, 0});
  ProtocolSpec wrong = spec(1e-3);
  wrong.lambda = kN - 1;
  EXPECT_THROW(quadratic_response_protocol(wrong, fock, qs_->u(), {1.0}), DomainError);
}
