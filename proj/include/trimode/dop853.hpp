#ifndef TRIMODE_DOP853_HPP
#define TRIMODE_DOP853_HPP

// Explicit Runge-Kutta 8(5,3) pair of Dormand & Prince (DOP853) with the
// seventh-order continuous extension. Fixed-size state, forward in time.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "trimode/error.hpp"

namespace trimode {

namespace dop853_detail {

inline constexpr std::array<double, 16> kC = {0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0, 1.0, 0.1, 0.2, 0.7777777777777778};
inline constexpr std::array<std::array<double, 16>, 16> kA = {{
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0, 0.0, 0.0, 0.0, 0.0},
    {0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259, 0.0, 0.0, 0.0, 0.0},
    {0.056167502283047954, 0.0, 0.0, 0.0, 0.0, 0.0, 0.25350021021662483, -0.2462390374708025, -0.12419142326381637, 0.15329179827876568, 0.00820105229563469, 0.007567897660545699, -0.008298, 0.0, 0.0, 0.0},
    {0.03183464816350214, 0.0, 0.0, 0.0, 0.0, 0.028300909672366776, 0.053541988307438566, -0.05492374857139099, 0.0, 0.0, -0.00010834732869724932, 0.0003825710908356584, -0.00034046500868740456, 0.1413124436746325, 0.0, 0.0},
    {-0.42889630158379194, 0.0, 0.0, 0.0, 0.0, -4.697621415361164, 7.683421196062599, 4.06898981839711, 0.3567271874552811, 0.0, 0.0, 0.0, -0.0013990241651590145, 2.9475147891527724, -9.15095847217987, 0.0}}};
inline constexpr std::array<double, 12> kB = {0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259};
inline constexpr std::array<double, 13> kE3 = {-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082, 0.0};
inline constexpr std::array<double, 13> kE5 = {0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0};
inline constexpr std::array<std::array<double, 16>, 4> kD = {{
    {-8.428938276109013, 0.0, 0.0, 0.0, 0.0, 0.5667149535193777, -3.0689499459498917, 2.38466765651207, 2.117034582445028, -0.871391583777973, 2.2404374302607883, 0.6315787787694688, -0.08899033645133331, 18.148505520854727, -9.194632392478356, -4.436036387594894},
    {10.427508642579134, 0.0, 0.0, 0.0, 0.0, 242.28349177525817, 165.20045171727028, -374.5467547226902, -22.113666853125306, 7.733432668472264, -30.674084731089398, -9.332130526430229, 15.697238121770845, -31.139403219565178, -9.35292435884448, 35.81684148639408},
    {19.985053242002433, 0.0, 0.0, 0.0, 0.0, -387.0373087493518, -189.17813819516758, 527.8081592054236, -11.57390253995963, 6.8812326946963, -1.0006050966910838, 0.7777137798053443, -2.778205752353508, -60.19669523126412, 84.32040550667716, 11.99229113618279},
    {-25.69393346270375, 0.0, 0.0, 0.0, 0.0, -154.18974869023643, -231.5293791760455, 357.6391179106141, 93.40532418362432, -37.45832313645163, 104.0996495089623, 29.8402934266605, -43.53345659001114, 96.32455395918828, -39.17726167561544, -149.72683625798564}}};

}  // namespace dop853_detail

struct StepControl {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
};

template <std::size_t Dim, class Rhs>
class Dop853 {
 public:
  using State = std::array<double, Dim>;

  Dop853(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), control_(control) {
    if (!(control_.rel_tol > 0.0) || !(control_.abs_tol > 0.0))
      throw ConfigError("Dop853: tolerances must be positive");
    if (!(control_.max_step > 0.0)) throw ConfigError("Dop853: max_step must be positive");
  }

  void initialize(const State& y0, double t0, double h0 = 0.0) {
    t_ = t_old_ = t0;
    y_ = y_old_ = y0;
    rhs_(y_, f_, t_);
    h_ = h0 > 0.0 ? std::min(h0, control_.max_step) : initial_step();
    dense_ready_ = false;
    steps_ = 0;
  }

  /// Take one accepted step, never going past t_bound.
  void step(double t_bound = std::numeric_limits<double>::infinity()) {
    using namespace dop853_detail;
    const double min_step = 10.0 * std::abs(std::nextafter(t_, INFINITY) - t_);
    double h = std::min(h_, control_.max_step);
    bool rejected = false;
    while (true) {
      if (h < min_step)
        throw NumericalError("Dop853: step size underflow at t = " + std::to_string(t_));
      double t_new = t_ + h;
      if (t_new > t_bound) {
        t_new = t_bound;
        h = t_new - t_;
      }
      State y_new;
      stages(h, y_new);
      State f_new;
      rhs_(y_new, f_new, t_new);
      k_[12] = f_new;
      const double err = error_norm(h, y_new);
      if (err < 1.0) {
        double factor = err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, -0.125));
        if (rejected) factor = std::min(1.0, factor);
        h_old_ = h;
        t_old_ = t_;
        y_old_ = y_;
        t_ = t_new;
        y_ = y_new;
        f_old_ = f_;
        f_ = f_new;
        h_ = h * factor;
        dense_ready_ = false;
        ++steps_;
        return;
      }
      h *= std::max(kMinFactor, kSafety * std::pow(err, -0.125));
      rejected = true;
    }
  }

  double time() const { return t_; }
  double previous_time() const { return t_old_; }
  const State& state() const { return y_; }
  const State& previous_state() const { return y_old_; }
  std::size_t steps() const { return steps_; }
  /// Proposed size of the next step.
  double step_size() const { return h_; }

  /// Continuous extension on the last step; t must lie in [previous_time, time].
  State interpolate(double t) {
    if (t == t_) return y_;
    if (!dense_ready_) prepare_dense();
    const double x = (t - t_old_) / h_old_;
    State y{};
    for (int i = 6; i >= 0; --i) {
      for (std::size_t d = 0; d < Dim; ++d) {
        y[d] += dense_[i][d];
        y[d] *= (i % 2 == 0) ? x : 1.0 - x;
      }
    }
    for (std::size_t d = 0; d < Dim; ++d) y[d] += y_old_[d];
    return y;
  }

 private:
  static constexpr double kSafety = 0.9;
  static constexpr double kMinFactor = 0.2;
  static constexpr double kMaxFactor = 10.0;

  void stages(double h, State& y_new) {
    using namespace dop853_detail;
    k_[0] = f_;
    for (int s = 1; s < 12; ++s) {
      State ys = y_;
      for (int j = 0; j < s; ++j) {
        const double a = kA[s][j];
        if (a == 0.0) continue;
        for (std::size_t d = 0; d < Dim; ++d) ys[d] += h * a * k_[j][d];
      }
      rhs_(ys, k_[s], t_ + kC[s] * h);
    }
    y_new = y_;
    for (int j = 0; j < 12; ++j) {
      const double b = kB[j];
      if (b == 0.0) continue;
      for (std::size_t d = 0; d < Dim; ++d) y_new[d] += h * b * k_[j][d];
    }
  }

  double error_norm(double h, const State& y_new) const {
    using namespace dop853_detail;
    double e5 = 0.0, e3 = 0.0;
    for (std::size_t d = 0; d < Dim; ++d) {
      const double scale =
          control_.abs_tol + control_.rel_tol * std::max(std::abs(y_[d]), std::abs(y_new[d]));
      double s5 = 0.0, s3 = 0.0;
      for (int j = 0; j < 13; ++j) {
        s5 += kE5[j] * k_[j][d];
        s3 += kE3[j] * k_[j][d];
      }
      s5 /= scale;
      s3 /= scale;
      e5 += s5 * s5;
      e3 += s3 * s3;
    }
    if (e5 == 0.0 && e3 == 0.0) return 0.0;
    const double denom = e5 + 0.01 * e3;
    return std::abs(h) * e5 / std::sqrt(denom * static_cast<double>(Dim));
  }

  void prepare_dense() {
    using namespace dop853_detail;
    // k_[12] holds f at the end of the accepted step; stages 0..11 are intact.
    std::array<State, 16> k = {};
    for (int s = 0; s < 13; ++s) k[s] = k_[s];
    k[0] = f_old_;
    const double h = h_old_;
    for (int s = 13; s < 16; ++s) {
      State ys = y_old_;
      for (int j = 0; j < s; ++j) {
        const double a = kA[s][j];
        if (a == 0.0) continue;
        for (std::size_t d = 0; d < Dim; ++d) ys[d] += h * a * k[j][d];
      }
      rhs_(ys, k[s], t_old_ + kC[s] * h);
    }
    for (std::size_t d = 0; d < Dim; ++d) {
      const double dy = y_[d] - y_old_[d];
      dense_[0][d] = dy;
      dense_[1][d] = h * f_old_[d] - dy;
      dense_[2][d] = 2.0 * dy - h * (f_[d] + f_old_[d]);
    }
    for (int i = 0; i < 4; ++i) {
      for (std::size_t d = 0; d < Dim; ++d) {
        double acc = 0.0;
        for (int j = 0; j < 16; ++j) acc += kD[i][j] * k[j][d];
        dense_[3 + i][d] = h * acc;
      }
    }
    dense_ready_ = true;
  }

  double initial_step() {
    // Hairer-Wanner starting step heuristic.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t d = 0; d < Dim; ++d) {
      const double sc = control_.abs_tol + control_.rel_tol * std::abs(y_[d]);
      d0 += (y_[d] / sc) * (y_[d] / sc);
      d1 += (f_[d] / sc) * (f_[d] / sc);
    }
    d0 = std::sqrt(d0 / Dim);
    d1 = std::sqrt(d1 / Dim);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, control_.max_step);
    State y1, f1;
    for (std::size_t d = 0; d < Dim; ++d) y1[d] = y_[d] + h0 * f_[d];
    rhs_(y1, f1, t_ + h0);
    double d2 = 0.0;
    for (std::size_t d = 0; d < Dim; ++d) {
      const double sc = control_.abs_tol + control_.rel_tol * std::abs(y_[d]);
      d2 += ((f1[d] - f_[d]) / sc) * ((f1[d] - f_[d]) / sc);
    }
    d2 = std::sqrt(d2 / Dim) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
    return std::min({100.0 * h0, h1, control_.max_step});
  }

  Rhs rhs_;
  StepControl control_;
  double t_ = 0.0, t_old_ = 0.0, h_ = 0.0, h_old_ = 0.0;
  State y_{}, y_old_{}, f_{}, f_old_{};
  std::array<State, 13> k_{};
  std::array<State, 7> dense_{};
  bool dense_ready_ = false;
  std::size_t steps_ = 0;
};

}  // namespace trimode

#endif  // TRIMODE_DOP853_HPP
