#include <gtest/gtest.h>

#include <set>

#include "trimode/chaos.hpp"

using namespace trimode;

namespace {

ClassicalState shell_point(double rho0, double theta_s, const ModelParams& p, double energy = 1.005) {
  const auto m = solve_m_for_energy(rho0, theta_s, 0.0, energy, p);
  if (!m) throw std::logic_error("test point is off the shell");
  return canonical_to_zeta(CanonicalCoords::make(rho0, theta_s, *m, 0.0));
}

const ModelParams kMixed{1.0, 1.0, 0.15, 100};

}  // namespace

TEST(Poincare, FixedPointHasNoCrossings) {
  const PoincareSection s = poincare_section({ClassicalState{}}, 200.0, ModelParams{});
  EXPECT_EQ(s.total_crossings(), 0u);
  ASSERT_EQ(s.warnings.size(), 1u);
}

TEST(Poincare, IntegrableCrossingsLieOnConservedCurve) {
  const ModelParams p;
  const ClassicalState z0 = canonical_to_zeta(CanonicalCoords::make(0.3, 0.0, 0.1, 0.0));
  const double e = mf_energy(z0, p);
  const PoincareSection s = poincare_section({z0}, 2000.0, p);
  ASSERT_GT(s.total_crossings(), 20u);
  double worst = 0.0;
  for (const auto& c : s.crossings[0]) {
    ASSERT_LT(std::abs(c.theta_m), 1e-8);
    ASSERT_LT(std::abs(c.energy - e), 1e-6);
    // Distance to the level set H(rho0, theta_s; m = 0.1) = E, to first order.
    const double h = 1e-6;
    auto f = [&](double r, double t) { return mf_energy(CanonicalCoords{r, t, 0.1, 0.0}, p) - e; };
    const double fr = (f(c.rho0 + h, c.theta_s) - f(c.rho0 - h, c.theta_s)) / (2 * h);
    const double ft = (f(c.rho0, c.theta_s + h) - f(c.rho0, c.theta_s - h)) / (2 * h);
    worst = std::max(worst, std::abs(f(c.rho0, c.theta_s)) / std::hypot(fr, ft));
    EXPECT_NEAR(c.m, 0.1, 1e-8);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Poincare, DirectionsPartitionTheCrossings) {
  const ClassicalState z0 = shell_point(0.2, -2 * kPi / 3, kMixed);
  const auto both = poincare_section({z0}, 300.0, kMixed, CrossingDirection::both);
  const auto pos = poincare_section({z0}, 300.0, kMixed, CrossingDirection::positive);
  const auto neg = poincare_section({z0}, 300.0, kMixed, CrossingDirection::negative);
  EXPECT_EQ(both.total_crossings(), pos.total_crossings() + neg.total_crossings());
  EXPECT_GT(pos.total_crossings(), 0u);
  EXPECT_GT(neg.total_crossings(), 0u);
  for (std::size_t k = 1; k < both.crossings[0].size(); ++k)
    ASSERT_GT(both.crossings[0][k].t, both.crossings[0][k - 1].t);
}

TEST(LyapunovConfig, Validation) {
  LyapunovConfig c;
  EXPECT_NO_THROW(c.validate());
  c.t_min = 2000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.t_min = 1995;
  EXPECT_THROW(c.validate(), ConfigError);  // 5 intervals
  c = {};
  c.xi0 = 0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(lyapunov_reset(ClassicalState{}, c, ModelParams{}), ConfigError);
}

TEST(Lyapunov, ChaoticPointIsPositiveAndMethodsAgree) {
  const ClassicalState z = shell_point(0.2, -2 * kPi / 3, kMixed);
  const LyapunovConfig cfg;
  const auto a = lyapunov_reset(z, cfg, kMixed);
  const auto b = lyapunov_fundamental(z, cfg, kMixed);
  EXPECT_GT(a.lambda, 3 * a.std_error);
  EXPECT_GT(b.lambda, 3 * b.std_error);
  EXPECT_LT(std::abs(a.lambda - b.lambda), 2 * (a.std_error + b.std_error));
  EXPECT_EQ(a.intervals, 1900u);
  EXPECT_EQ(a.method, LyapunovMethod::reset);
  EXPECT_EQ(b.method, LyapunovMethod::fundamental);
}

TEST(Lyapunov, RegularPointIsNearZero) {
  const ClassicalState z = shell_point(0.2, 4 * kPi / 3, kMixed);
  for (auto m : {LyapunovMethod::reset, LyapunovMethod::fundamental}) {
    const auto e = lyapunov(z, LyapunovConfig{}, kMixed, m);
    EXPECT_LT(std::abs(e.lambda), 0.02) << to_string(m);
  }
}

TEST(Lyapunov, IntegrableModelIsRegular) {
  const ModelParams p;
  const auto e = lyapunov_reset(shell_point(0.3, 2 * kPi / 3, p), LyapunovConfig{}, p);
  EXPECT_LT(std::abs(e.lambda), 0.02);
  EXPECT_LT(std::abs(e.lambda), 2 * e.std_error + 0.01);
}

TEST(Lyapunov, StableFixedPointIsNotPositive) {
  const ModelParams p;
  for (auto m : {LyapunovMethod::reset, LyapunovMethod::fundamental}) {
    const auto e = lyapunov(ClassicalState{}, LyapunovConfig{}, p, m);
    EXPECT_LT(e.lambda, 2 * e.std_error + 1e-3) << to_string(m);
  }
}

TEST(Lyapunov, InsensitiveToSeedAndSeparation) {
  const ModelParams p{1, 1, 0.5, 100};
  const ClassicalState z = shell_point(0.5, -2 * kPi / 3, p);
  LyapunovConfig cfg;
  const auto a = lyapunov_reset(z, cfg, p);
  cfg.seed = 99;
  const auto b = lyapunov_reset(z, cfg, p);
  cfg.xi0 = 0.5e-8;
  const auto c = lyapunov_reset(z, cfg, p);
  EXPECT_GT(a.lambda, 0.1);
  EXPECT_LT(std::abs(a.lambda - b.lambda), 3 * (a.std_error + b.std_error));
  EXPECT_LT(std::abs(a.lambda - c.lambda), 3 * (a.std_error + c.std_error));
}

TEST(Lyapunov, StableUnderLongerRuns) {
  const ModelParams p{1, 1, 0.5, 100};
  const ClassicalState z = shell_point(0.5, -2 * kPi / 3, p);
  LyapunovConfig cfg;
  const auto a = lyapunov_fundamental(z, cfg, p);
  cfg.t_total = 4000;
  const auto b = lyapunov_fundamental(z, cfg, p);
  EXPECT_GT(b.lambda, 0.1);
  EXPECT_LT(std::abs(a.lambda - b.lambda), 3 * (a.std_error + b.std_error));
}

TEST(Lyapunov, Deterministic) {
  const ClassicalState z = shell_point(0.2, -2 * kPi / 3, kMixed);
  LyapunovConfig cfg;
  cfg.t_total = 300;
  EXPECT_EQ(lyapunov_reset(z, cfg, kMixed).lambda, lyapunov_reset(z, cfg, kMixed).lambda);
  EXPECT_EQ(lyapunov_fundamental(z, cfg, kMixed).lambda, lyapunov_fundamental(z, cfg, kMixed).lambda);
}

TEST(LyapunovMap, EmptyWhenEnergyAboveShell) {
  EnergyShellSpec shell;
  shell.energy = 100.0;
  shell.n_rho0 = shell.n_theta_s = 6;
  const LyapunovMap m = lyapunov_map(shell, LyapunovConfig{}, ModelParams{});
  EXPECT_EQ(m.values.size(), 36u);
  EXPECT_EQ(m.populated(), 0u);
}

TEST(LyapunovMap, CellsUseDerivedSeedsAndMatchSinglePointRuns) {
  EnergyShellSpec shell;
  shell.n_rho0 = shell.n_theta_s = 4;
  LyapunovConfig cfg;
  cfg.t_min = 10;
  cfg.t_total = 100;
  cfg.seed = 5;
  const LyapunovMap m = lyapunov_map(shell, cfg, kMixed);
  ASSERT_GT(m.populated(), 0u);
  for (std::size_t k = 0; k < m.cells.size(); ++k) {
    ASSERT_EQ(m.cells[k].m.has_value(), m.values[k].has_value());
    if (!m.values[k]) continue;
    LyapunovConfig c = cfg;
    c.seed = derive_seed(cfg.seed, k);
    EXPECT_EQ(m.values[k]->lambda, lyapunov_reset(cell_state(m.cells[k], shell), c, kMixed).lambda);
  }
}

TEST(ShellCells, SolvedCellsSitOnTheShell) {
  EnergyShellSpec shell;
  shell.n_rho0 = shell.n_theta_s = 10;
  for (const auto& c : shell_cells(shell, kMixed)) {
    if (!c.m) continue;
    ASSERT_NEAR(mf_energy(cell_state(c, shell), kMixed), shell.energy, 1e-10);
  }
}

TEST(ParallelHelpers, DeriveSeedSpreads) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(derive_seed(42, k));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(ParallelHelpers, ExceptionsPropagate) {
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw NumericalError("boom");
               }),
               NumericalError);
}
