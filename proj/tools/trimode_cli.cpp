// trimode: command-line front end. Every subcommand writes one data file
// (CSV or JSON) plus <command>.manifest.json into --out.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trimode/trimode.hpp"

namespace {

using namespace trimode;
using json = nlohmann::json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Options {
  double gn = 1.0, q = 1.0, r = 0.0;
  int n_atoms = 100;
  double energy = 1.005;
  std::string grid;
  double t_max = kUnset;
  double dt = kUnset;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double d0 = 1e-6;
  std::string method;
  double phi = 1e-3;
  std::string window;
  std::string out = ".";
  std::string format = "csv";
  std::vector<std::string> states;
  bool raster = false;

  // subcommand specific
  std::string direction = "both";
  int n_traj = 8;
  double t_reset = 1.0, t_min = 100.0, xi0 = 1e-8;
  int bins = 40;
  double s_max = 4.0;
  int m_grid = 101;
  std::string v_label = "rho0", w_label = "rho0", a_label = "Sx", observable = "N0";
  std::string fock;
  bool normalize = false;
};

/// Argument problems detected after parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ModelParams params(const Options& o) {
  ModelParams p;
  p.gn = o.gn;
  p.q = o.q;
  p.r = o.r;
  p.n_atoms = o.n_atoms;
  p.validate();
  return p;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " value '" + s + "'");
  }
}

std::pair<int, int> parse_grid(const std::string& s, int def_r, int def_c) {
  if (s.empty()) return {def_r, def_c};
  const auto parts = split(s, 'x');
  if (parts.size() != 2) throw UsageError("--grid expects RxC, got '" + s + "'");
  const int r = static_cast<int>(to_double(parts[0], "--grid")), c = static_cast<int>(to_double(parts[1], "--grid"));
  if (r < 2 || c < 2) throw UsageError("--grid dimensions must be >= 2");
  return {r, c};
}

std::pair<double, double> parse_window(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw UsageError("--window expects lo,hi");
  return {to_double(parts[0], "--window"), to_double(parts[1], "--window")};
}

/// rho0,theta_s,theta_m,m with m = "auto" solved on the --energy shell.
ClassicalState parse_state(const std::string& s, const Options& o, const ModelParams& p, json& record) {
  const auto parts = split(s, ',');
  if (parts.size() != 4) throw UsageError("--state expects rho0,theta_s,theta_m,m (m may be 'auto')");
  const double rho0 = to_double(parts[0], "--state rho0");
  const double ts = to_double(parts[1], "--state theta_s");
  const double tm = to_double(parts[2], "--state theta_m");
  double m = 0.0;
  if (parts[3] == "auto") {
    const auto root = solve_m_for_energy(rho0, ts, tm, o.energy, p);
    if (!root) throw UsageError("--state: no m puts (" + s + ") on the energy shell E = " + format_number(o.energy));
    m = *root;
  } else {
    m = to_double(parts[3], "--state m");
  }
  record.push_back({{"rho0", rho0}, {"theta_s", ts}, {"theta_m", tm}, {"m", m}});
  return canonical_to_zeta(CanonicalCoords::make(rho0, ts, m, tm));
}

std::vector<double> time_grid(double t_max, double dt) {
  if (!(t_max >= 0.0) || !(dt > 0.0)) throw UsageError("--t-max must be >= 0 and --dt > 0");
  std::vector<double> t;
  const auto n = static_cast<long>(std::floor(t_max / dt + 1e-9));
  for (long k = 0; k <= n; ++k) t.push_back(k * dt);
  return t;
}

double or_default(double v, double def) { return std::isnan(v) ? def : v; }

class Runner {
 public:
  Runner(const std::string& command, const Options& o) : o_(o), start_(std::chrono::steady_clock::now()) {
    manifest_.command = command;
    std::filesystem::create_directories(o.out);
  }

  json& params() { return manifest_.parameters; }

  void emit(const Table& t, const std::string& stem) {
    if (o_.format == "json") {
      const std::string path = o_.out + "/" + stem + ".json";
      write_json(table_json(t, manifest_), path);
      manifest_.outputs.push_back(path);
    } else {
      const std::string path = o_.out + "/" + stem + ".csv";
      write_csv(t, path, manifest_);
      manifest_.outputs.push_back(path);
    }
  }

  void emit_json(json j, const std::string& stem) {
    j["manifest_hash"] = manifest_.hash();
    const std::string path = o_.out + "/" + stem + ".json";
    write_json(j, path);
    manifest_.outputs.push_back(path);
  }

  void emit_raster(const std::vector<double>& v, int rows, int cols, const std::string& stem) {
    const std::string path = o_.out + "/" + stem + ".pgm";
    write_pgm(v, rows, cols, path);
    manifest_.outputs.push_back(path);
  }

  void finish() {
    manifest_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::string path = o_.out + "/" + manifest_.command + ".manifest.json";
    write_json(manifest_.to_json(), path);
    std::cout << "wrote";
    for (const auto& f : manifest_.outputs) std::cout << ' ' << f;
    std::cout << ' ' << path << '\n';
  }

 private:
  const Options& o_;
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

void base_params(Runner& run, const Options& o, const ModelParams& p) {
  run.params()["model"] = to_json(p);
  run.params()["energy"] = o.energy;
  run.params()["seed"] = o.seed;
}

std::vector<ClassicalState> states_or(const Options& o, const ModelParams& p, json& rec,
                                      const std::string& fallback) {
  std::vector<ClassicalState> out;
  if (o.states.empty()) out.push_back(parse_state(fallback, o, p, rec));
  for (const auto& s : o.states) out.push_back(parse_state(s, o, p, rec));
  return out;
}

// The chaotic coherent-state center used throughout the quantum examples.
const std::string kDefaultState = "0.2,-2.0943951023931953,0,auto";

int cmd_poincare(const Options& o) {
  const ModelParams p = params(o);
  Runner run("poincare", o);
  base_params(run, o, p);
  json rec = json::array();
  std::vector<ClassicalState> init;
  for (const auto& s : o.states) init.push_back(parse_state(s, o, p, rec));
  if (init.empty()) {
    // Evenly spaced populated cells of a coarse shell raster.
    EnergyShellSpec shell;
    shell.energy = o.energy;
    shell.n_rho0 = shell.n_theta_s = 16;
    std::vector<ShellCell> cells;
    for (const auto& c : shell_cells(shell, p))
      if (c.m) cells.push_back(c);
    if (cells.empty()) throw UsageError("poincare: energy shell is empty; pass --state");
    const int n = std::min<int>(o.n_traj, static_cast<int>(cells.size()));
    for (int k = 0; k < n; ++k) {
      const auto& c = cells[static_cast<std::size_t>(k) * cells.size() / n];
      rec.push_back({{"rho0", c.rho0}, {"theta_s", c.theta_s}, {"theta_m", 0.0}, {"m", *c.m}});
      init.push_back(cell_state(c, shell));
    }
  }
  const double t_end = or_default(o.t_max, 1000.0);
  CrossingDirection dir = CrossingDirection::both;
  if (o.direction == "positive") dir = CrossingDirection::positive;
  else if (o.direction == "negative") dir = CrossingDirection::negative;
  else if (o.direction != "both") throw UsageError("--direction must be both, positive or negative");
  run.params()["states"] = rec;
  run.params()["t_max"] = t_end;
  run.params()["direction"] = o.direction;
  const PoincareSection sec = poincare_section(init, t_end, p, dir);
  for (const auto& w : sec.warnings) std::cerr << "warning: " << w << '\n';
  run.emit(to_table(sec), "poincare");
  run.finish();
  return 0;
}

LyapunovConfig lyap_config(const Options& o) {
  LyapunovConfig c;
  c.xi0 = o.xi0;
  c.t_reset = o.t_reset;
  c.t_min = o.t_min;
  c.t_total = or_default(o.t_max, 2000.0);
  c.seed = o.seed;
  return c;
}

void lyap_params(Runner& run, const LyapunovConfig& c) {
  run.params()["lyapunov"] = {{"xi0", c.xi0}, {"t_reset", c.t_reset}, {"t_min", c.t_min}, {"t_total", c.t_total}};
}

int cmd_lyapunov(const Options& o) {
  const ModelParams p = params(o);
  Runner run("lyapunov", o);
  base_params(run, o, p);
  json rec = json::array();
  const auto states = states_or(o, p, rec, kDefaultState);
  const LyapunovConfig cfg = lyap_config(o);
  cfg.validate();
  const std::string method = o.method.empty() ? "both" : o.method;
  if (method != "both" && method != "reset" && method != "fundamental")
    throw UsageError("--method must be reset, fundamental or both");
  run.params()["states"] = rec;
  run.params()["method"] = method;
  lyap_params(run, cfg);
  Table t{{"state", "method", "lambda", "stderr", "intervals"}, {}, {}};
  t.meta.push_back("method code: 0 = reset, 1 = fundamental; lambda in gN/hbar");
  for (std::size_t k = 0; k < states.size(); ++k) {
    for (auto m : {LyapunovMethod::reset, LyapunovMethod::fundamental}) {
      if (method != "both" && method != to_string(m)) continue;
      const auto e = lyapunov(states[k], cfg, p, m);
      t.add({static_cast<double>(k), m == LyapunovMethod::reset ? 0.0 : 1.0, e.lambda, e.std_error,
             static_cast<double>(e.intervals)});
    }
  }
  run.emit(t, "lyapunov");
  run.finish();
  return 0;
}

int cmd_lyapunov_map(const Options& o) {
  const ModelParams p = params(o);
  Runner run("lyapunov-map", o);
  base_params(run, o, p);
  const auto [rows, cols] = parse_grid(o.grid, 80, 80);
  EnergyShellSpec shell;
  shell.energy = o.energy;
  shell.n_rho0 = rows;
  shell.n_theta_s = cols;
  const LyapunovConfig cfg = lyap_config(o);
  const std::string method = o.method.empty() ? "reset" : o.method;
  if (method != "reset" && method != "fundamental") throw UsageError("--method must be reset or fundamental");
  run.params()["grid"] = {rows, cols};
  run.params()["method"] = method;
  lyap_params(run, cfg);
  const LyapunovMap map =
      lyapunov_map(shell, cfg, p, method == "reset" ? LyapunovMethod::reset : LyapunovMethod::fundamental);
  run.emit(to_table(map), "lyapunov-map");
  if (o.raster) {
    std::vector<double> v;
    for (const auto& e : map.values) v.push_back(e ? e->lambda : std::numeric_limits<double>::quiet_NaN());
    run.emit_raster(v, rows, cols, "lyapunov-map");
  }
  run.finish();
  return 0;
}

std::vector<std::vector<double>> block_levels(const Spectrum& s) {
  std::vector<std::vector<double>> out;
  for (const auto& b : s.blocks) out.emplace_back(b.values.data(), b.values.data() + b.values.size());
  return out;
}

int cmd_spectrum(const Options& o) {
  const ModelParams p = params(o);
  Runner run("spectrum", o);
  base_params(run, o, p);
  const auto basis = build_basis(p.n_atoms);
  const Spectrum s = diagonalize(parity_blocks(build_hamiltonian(basis, p)), false);
  run.emit(to_table(s), "spectrum");
  run.finish();
  return 0;
}

int cmd_level_stats(const Options& o) {
  const ModelParams p = params(o);
  Runner run("level-stats", o);
  base_params(run, o, p);
  run.params()["bins"] = o.bins;
  run.params()["s_max"] = o.s_max;
  const auto basis = build_basis(p.n_atoms);
  const Spectrum s = diagonalize(parity_blocks(build_hamiltonian(basis, p)), false);
  const SpacingEnsemble ens = unfold(block_levels(s));
  const BrodyFit fit = brody_fit(ens);
  run.emit(histogram_table(spacing_histogram(ens.spacings, o.bins, o.s_max), fit), "level-stats");
  json j = to_json(fit);
  j["mean_spacing"] = ens.mean();
  j["block_levels"] = ens.block_levels;
  j["discarded"] = ens.discarded;
  run.emit_json(j, "level-stats.fit");
  run.finish();
  return 0;
}

int cmd_husimi(const Options& o) {
  const ModelParams p = params(o);
  Runner run("husimi", o);
  base_params(run, o, p);
  json rec = json::array();
  const ClassicalState z = states_or(o, p, rec, kDefaultState).front();
  const double t = or_default(o.t_max, 0.0);
  const auto [rows, cols] = parse_grid(o.grid, 80, 80);
  EnergyShellSpec g;
  g.n_rho0 = rows;
  g.n_theta_s = cols;
  run.params()["states"] = rec;
  run.params()["t"] = t;
  run.params()["grid"] = {rows, cols};
  run.params()["m_grid"] = o.m_grid;
  const QuantumSystem qs = QuantumSystem::build(p);
  const QuantumState psi = evolve(coherent_state(z, qs.basis), qs.u(), t);
  HusimiGrid h = husimi_grid(psi, g, o.m_grid, o.normalize);
  Table tab = to_table(h);
  tab.meta.push_back("state: " + rec.front().dump() + ", t: " + format_number(t));
  run.emit(tab, "husimi");
  if (o.raster) run.emit_raster(h.values, rows, cols, "husimi");
  run.finish();
  return 0;
}

int cmd_otoc_ed(const Options& o) {
  const ModelParams p = params(o);
  Runner run("otoc-ed", o);
  base_params(run, o, p);
  json rec = json::array();
  const ClassicalState z = states_or(o, p, rec, kDefaultState).front();
  const auto times = time_grid(or_default(o.t_max, 100.0), or_default(o.dt, 0.1));
  run.params()["states"] = rec;
  run.params()["times"] = {times.front(), times.back(), times.size()};
  run.params()["v"] = o.v_label;
  run.params()["w"] = o.w_label;
  const QuantumSystem qs = QuantumSystem::build(p);
  const OtocSeries s = otoc_ed(coherent_state(z, qs.basis), o.v_label, o.w_label, times, qs.u());
  run.emit(to_table(s), "otoc-ed");
  run.finish();
  return 0;
}

TwaConfig twa_config(const Options& o) {
  TwaConfig c;
  c.n_samples = o.samples;
  c.seed = o.seed;
  c.d0 = o.d0;
  if (o.method == "two-trajectory") c.derivative = DerivativeMethod::two_trajectory;
  else if (!o.method.empty() && o.method != "fundamental")
    throw UsageError("--method must be fundamental or two-trajectory");
  c.validate();
  return c;
}

int cmd_otoc_twa(const Options& o) {
  const ModelParams p = params(o);
  Runner run("otoc-twa", o);
  base_params(run, o, p);
  json rec = json::array();
  const ClassicalState z = states_or(o, p, rec, kDefaultState).front();
  const TwaConfig cfg = twa_config(o);
  const auto times = time_grid(or_default(o.t_max, 5.0), or_default(o.dt, 0.05));
  run.params()["states"] = rec;
  run.params()["times"] = {times.front(), times.back(), times.size()};
  run.params()["twa"] = {{"samples", cfg.n_samples}, {"d0", cfg.d0}, {"method", to_string(cfg.derivative)},
                         {"hbar_eff", cfg.hbar(p.n_atoms)}};
  const OtocSeries s = twa_otoc(z, p.n_atoms, times, cfg, p);
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
  run.emit(to_table(s), "otoc-twa");
  if (!o.window.empty()) {
    const auto [lo, hi] = parse_window(o.window);
    run.params()["window"] = {lo, hi};
    json j = to_json(otoc_growth_fit(s, lo, hi));
    j["window"] = {lo, hi};
    run.emit_json(j, "otoc-twa.fit");
  }
  run.finish();
  return 0;
}

int cmd_evolve_twa(const Options& o) {
  const ModelParams p = params(o);
  Runner run("evolve-twa", o);
  base_params(run, o, p);
  json rec = json::array();
  const ClassicalState z = states_or(o, p, rec, kDefaultState).front();
  const TwaConfig cfg = twa_config(o);
  const auto times = time_grid(or_default(o.t_max, 2.5), or_default(o.dt, 0.05));
  run.params()["states"] = rec;
  run.params()["times"] = {times.front(), times.back(), times.size()};
  run.params()["observable"] = o.observable;
  run.params()["twa"] = {{"samples", cfg.n_samples}};
  run.emit(to_table(twa_observable(z, p.n_atoms, o.observable, times, cfg, p)), "evolve-twa");
  run.finish();
  return 0;
}

int cmd_protocol_qr(const Options& o) {
  const ModelParams p = params(o);
  Runner run("protocol-qr", o);
  base_params(run, o, p);
  const auto times = time_grid(or_default(o.t_max, 5.0), or_default(o.dt, 0.25));
  const QuantumSystem qs = QuantumSystem::build(p);
  FockState f{0, p.n_atoms, 0};
  if (!o.fock.empty()) {
    const auto parts = split(o.fock, ',');
    if (parts.size() != 3) throw UsageError("--fock expects n+,n0,n-");
    f = {static_cast<int>(to_double(parts[0], "--fock")), static_cast<int>(to_double(parts[1], "--fock")),
         static_cast<int>(to_double(parts[2], "--fock"))};
  }
  const QuantumState psi = fock_state(qs.basis, f);
  ProtocolSpec spec;
  spec.a_label = o.a_label;
  spec.v_label = o.v_label == "rho0" ? "N0" : o.v_label;
  spec.phi = o.phi;
  spec.lambda = expectation(make_operator(spec.v_label, qs.basis).matrix, psi.amplitudes);
  run.params()["fock"] = {f.n_plus, f.n_zero, f.n_minus};
  run.params()["protocol"] = {{"A", spec.a_label}, {"V", spec.v_label}, {"phi", spec.phi}, {"Lambda", spec.lambda}};
  run.params()["times"] = {times.front(), times.back(), times.size()};
  const ProtocolResult res = quadratic_response_protocol(spec, psi, qs.u(), times);
  Table t{{"t", "C", "gamma_v", "gamma_v2"}, {}, {}};
  t.meta.push_back("C = -2 Lambda gamma_v + gamma_v2; operators V = " + spec.v_label + ", A = " + spec.a_label);
  for (std::size_t k = 0; k < times.size(); ++k) t.add({times[k], res.series.values[k], res.gamma_v[k], res.gamma_v2[k]});
  run.emit(t, "protocol-qr");
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trimode: classical and quantum chaos in a three-mode spinor condensate model"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--gn", o.gn, "interaction energy gN")->capture_default_str();
  app.add_option("--q", o.q, "quadratic Zeeman shift")->capture_default_str();
  app.add_option("--r", o.r, "rf coupling")->capture_default_str();
  app.add_option("--n-atoms", o.n_atoms, "atom number N")->capture_default_str();
  app.add_option("--energy", o.energy, "mean-field energy shell E")->capture_default_str();
  app.add_option("--grid", o.grid, "raster size RxC (rho0 x theta_s)");
  app.add_option("--t-max", o.t_max, "final time (hbar/gN)");
  app.add_option("--dt", o.dt, "output time step");
  app.add_option("--samples", o.samples, "TWA samples")->capture_default_str();
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--d0", o.d0, "two-trajectory offset")->capture_default_str();
  app.add_option("--method", o.method, "reset|fundamental|both or fundamental|two-trajectory");
  app.add_option("--phi", o.phi, "protocol kick angle")->capture_default_str();
  app.add_option("--window", o.window, "growth-fit window lo,hi");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--state", o.states, "rho0,theta_s,theta_m,m (m may be 'auto'); repeatable");
  app.add_flag("--raster", o.raster, "also write a PGM raster for grid results");

  auto* poincare = app.add_subcommand("poincare", "Poincare section at theta_m = 0");
  poincare->add_option("--direction", o.direction, "both|positive|negative")->capture_default_str();
  poincare->add_option("--n-traj", o.n_traj, "trajectories when no --state is given")->capture_default_str();
  auto* lyap = app.add_subcommand("lyapunov", "largest Lyapunov exponent of one or more states");
  auto* lmap = app.add_subcommand("lyapunov-map", "Lyapunov raster on an energy shell");
  for (auto* s : {lyap, lmap}) {
    s->add_option("--t-reset", o.t_reset, "renormalisation interval")->capture_default_str();
    s->add_option("--t-min", o.t_min, "discarded transient")->capture_default_str();
    s->add_option("--xi0", o.xi0, "initial separation")->capture_default_str();
  }
  auto* spectrum = app.add_subcommand("spectrum", "parity-block spectrum");
  auto* level = app.add_subcommand("level-stats", "unfolded spacing histogram and Brody fit");
  level->add_option("--bins", o.bins, "histogram bins")->capture_default_str();
  level->add_option("--s-max", o.s_max, "histogram range")->capture_default_str();
  auto* husimi = app.add_subcommand("husimi", "Husimi raster of an evolved coherent state (--t-max = time)");
  husimi->add_option("--m-grid", o.m_grid, "m-grid points")->capture_default_str();
  husimi->add_flag("--normalize", o.normalize, "divide by the maximum");
  auto* otoc = app.add_subcommand("otoc-ed", "exact OTOC of a coherent state");
  otoc->add_option("--v", o.v_label, "V operator")->capture_default_str();
  otoc->add_option("--w", o.w_label, "W operator")->capture_default_str();
  auto* otoc_twa = app.add_subcommand("otoc-twa", "semi-classical OTOC");
  auto* evolve_twa = app.add_subcommand("evolve-twa", "TWA single-time observable");
  evolve_twa->add_option("--observable", o.observable, "N0|N1|Nm1|Sz|rho0|sz")->capture_default_str();
  auto* protocol = app.add_subcommand("protocol-qr", "quadratic-response echo protocol");
  protocol->add_option("--a", o.a_label, "kick generator")->capture_default_str();
  protocol->add_option("--v", o.v_label, "measured operator")->capture_default_str();
  protocol->add_option("--fock", o.fock, "initial Fock state n+,n0,n- (default 0,N,0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (!o.grid.empty()) parse_grid(o.grid, 0, 0);
    if (!o.window.empty()) parse_window(o.window);
    if (*poincare) return cmd_poincare(o);
    if (*lyap) return cmd_lyapunov(o);
    if (*lmap) return cmd_lyapunov_map(o);
    if (*spectrum) return cmd_spectrum(o);
    if (*level) return cmd_level_stats(o);
    if (*husimi) return cmd_husimi(o);
    if (*otoc) return cmd_otoc_ed(o);
    if (*otoc_twa) return cmd_otoc_twa(o);
    if (*evolve_twa) return cmd_evolve_twa(o);
    if (*protocol) return cmd_protocol_qr(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
