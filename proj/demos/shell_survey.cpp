// Coarse Lyapunov survey of one energy shell, printed as a character map.
//   trimode_demo [r] [energy]
// '.' regular, '+' weakly chaotic, '#' chaotic, ' ' outside the shell.

#include <cstdio>
#include <cstdlib>

#include "trimode/trimode.hpp"

int main(int argc, char** argv) {
  using namespace trimode;
  ModelParams p;
  p.r = argc > 1 ? std::atof(argv[1]) : 0.15;
  const double energy = argc > 2 ? std::atof(argv[2]) : 1.005;

  EnergyShellSpec shell;
  shell.energy = energy;
  shell.n_rho0 = 12;
  shell.n_theta_s = 36;
  LyapunovConfig cfg;
  cfg.t_min = 20.0;
  cfg.t_total = 200.0;

  const LyapunovMap map = lyapunov_map(shell, cfg, p);
  std::printf("r = %.3f, E = %.4f: %zu of %zu cells on the shell\n", p.r, energy, map.populated(), shell.size());
  std::printf("rows: rho0 from 1 (top) to 0; columns: theta_s from -2pi to 2pi\n");
  for (int i = shell.n_rho0 - 1; i >= 0; --i) {
    for (int j = 0; j < shell.n_theta_s; ++j) {
      const auto& v = map.values[static_cast<std::size_t>(i) * shell.n_theta_s + j];
      std::putchar(!v ? ' ' : v->lambda > 0.1 ? '#' : v->lambda > 0.03 ? '+' : '.');
    }
    std::putchar('\n');
  }
  return 0;
}
