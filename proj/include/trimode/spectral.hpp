#ifndef TRIMODE_SPECTRAL_HPP
#define TRIMODE_SPECTRAL_HPP

// Level-spacing statistics: per-block polynomial unfolding, pooled spacing
// ensembles, Poisson / Wigner / Brody densities and the Brody MLE.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "trimode/error.hpp"
#include "trimode/model.hpp"

namespace trimode {

struct UnfoldConfig {
  int poly_degree = 10;
  double edge_fraction = 0.02;  // discarded at each end of every block
  std::size_t min_levels = 50;

  void validate() const {
    if (poly_degree < 1) throw ConfigError("UnfoldConfig: poly_degree must be >= 1");
    if (!(edge_fraction >= 0.0 && edge_fraction < 0.5)) throw ConfigError("UnfoldConfig: edge_fraction must be in [0, 0.5)");
  }
};

struct SpacingEnsemble {
  std::vector<double> spacings;
  std::vector<int> source_block;         // block index per spacing
  std::vector<std::size_t> block_levels;  // levels per input block
  std::vector<std::size_t> discarded;     // levels dropped per block (both edges)

  double mean() const {
    double s = 0.0;
    for (double v : spacings) s += v;
    return spacings.empty() ? 0.0 : s / static_cast<double>(spacings.size());
  }
};

namespace detail {
// Chebyshev polynomials T_0..T_deg at x, and their derivatives.
inline void chebyshev(double x, int deg, double* t, double* dt) {
  t[0] = 1.0;
  dt[0] = 0.0;
  if (deg >= 1) {
    t[1] = x;
    dt[1] = 1.0;
  }
  for (int k = 2; k <= deg; ++k) {
    t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    dt[k] = 2.0 * t[k - 1] + 2.0 * x * dt[k - 1] - dt[k - 2];
  }
}
}  // namespace detail

/// Smooth cumulative level count fitted to one block, evaluated at each level.
/// Throws NumericalError if the fit is not increasing over the retained range.
inline std::vector<double> unfold_block(std::vector<double> levels, const UnfoldConfig& cfg) {
  cfg.validate();
  const std::size_t n = levels.size();
  if (n < cfg.min_levels) throw ConfigError("unfold: fewer than " + std::to_string(cfg.min_levels) + " levels in a block");
  std::sort(levels.begin(), levels.end());
  const double lo = levels.front(), hi = levels.back();
  if (!(hi > lo)) throw NumericalError("unfold: block spectrum has zero width");
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const int deg = cfg.poly_degree;

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), deg + 1);
  Eigen::VectorXd count(static_cast<Eigen::Index>(n));
  std::vector<double> t(deg + 1), dt(deg + 1);
  for (std::size_t k = 0; k < n; ++k) {
    detail::chebyshev((levels[k] - mid) / half, deg, t.data(), dt.data());
    for (int j = 0; j <= deg; ++j) design(static_cast<Eigen::Index>(k), j) = t[j];
    count[static_cast<Eigen::Index>(k)] = static_cast<double>(k) + 0.5;
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(count);

  const auto cut = static_cast<std::size_t>(std::floor(cfg.edge_fraction * static_cast<double>(n)));
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = design.row(static_cast<Eigen::Index>(k)).dot(coef);
  // Monotonicity on a fine grid across the retained range.
  const double x0 = (levels[cut] - mid) / half, x1 = (levels[n - 1 - cut] - mid) / half;
  constexpr int kProbe = 2000;
  for (int k = 0; k <= kProbe; ++k) {
    detail::chebyshev(x0 + (x1 - x0) * k / kProbe, deg, t.data(), dt.data());
    double d = 0.0;
    for (int j = 0; j <= deg; ++j) d += coef[j] * dt[j];
    if (!(d > 0.0)) throw NumericalError("unfold: fitted level staircase is not monotonic over the fit range");
  }
  return out;
}

/// Unfold every block separately, take spacings within blocks only, drop
/// edge levels and pool.
inline SpacingEnsemble unfold(const std::vector<std::vector<double>>& blocks, const UnfoldConfig& cfg = {}) {
  SpacingEnsemble ens;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::vector<double> eps = unfold_block(blocks[b], cfg);
    const std::size_t n = eps.size();
    const auto cut = static_cast<std::size_t>(std::floor(cfg.edge_fraction * static_cast<double>(n)));
    ens.block_levels.push_back(n);
    ens.discarded.push_back(2 * cut);
    for (std::size_t k = cut; k + 1 < n - cut; ++k) {
      ens.spacings.push_back(std::max(eps[k + 1] - eps[k], 0.0));
      ens.source_block.push_back(static_cast<int>(b));
    }
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Reference densities
// ---------------------------------------------------------------------------

inline double poisson_pdf(double s) { return s < 0.0 ? 0.0 : std::exp(-s); }

inline double wigner_pdf(double s) { return s < 0.0 ? 0.0 : 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s); }

/// alpha = Gamma((b+2)/(b+1))^(b+1); fixes unit mean of the Brody density.
inline double brody_alpha(double b) { return std::pow(boost::math::tgamma((b + 2.0) / (b + 1.0)), b + 1.0); }

inline double brody_pdf(double s, double b) {
  if (s < 0.0) return 0.0;
  const double a = brody_alpha(b);
  if (s == 0.0) return b == 0.0 ? a : (b > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return (b + 1.0) * a * std::pow(s, b) * std::exp(-a * std::pow(s, b + 1.0));
}

inline double brody_cdf(double s, double b) {
  return s <= 0.0 ? 0.0 : -std::expm1(-brody_alpha(b) * std::pow(s, b + 1.0));
}

/// Inverse-CDF sampling of the Brody density.
inline std::vector<double> sample_brody(double b, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double a = brody_alpha(b);
  std::vector<double> out(n);
  for (auto& s : out) s = std::pow(-std::log1p(-uni(rng)) / a, 1.0 / (b + 1.0));
  return out;
}

// ---------------------------------------------------------------------------
// Brody maximum likelihood
// ---------------------------------------------------------------------------

struct BrodyFit {
  double b = 0.0;
  double alpha = 1.0;
  double stderr_b = 0.0;
  std::size_t n_spacings = 0;
  double log_likelihood = 0.0;
};

struct BrodyFitConfig {
  double b_min = -0.2;
  double b_max = 1.5;
  std::size_t min_spacings = 500;
  double spacing_floor = 1e-12;
  std::uintmax_t max_iterations = 200;
};

inline double brody_log_likelihood(double b, double sum_log_s, double n, const std::vector<double>& s) {
  const double a = brody_alpha(b);
  double tail = 0.0;
  for (double v : s) tail += std::pow(v, b + 1.0);
  return n * std::log((b + 1.0) * a) + b * sum_log_s - a * tail;
}

inline BrodyFit brody_fit(const std::vector<double>& spacings, const BrodyFitConfig& cfg = {}) {
  if (spacings.size() < cfg.min_spacings)
    throw ConfigError("brody_fit: need at least " + std::to_string(cfg.min_spacings) + " spacings");
  std::vector<double> s(spacings.size());
  double sum_log = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!(spacings[k] >= 0.0) || !std::isfinite(spacings[k])) throw DomainError("brody_fit: spacings must be finite and >= 0");
    s[k] = std::max(spacings[k], cfg.spacing_floor);
    sum_log += std::log(s[k]);
  }
  const double n = static_cast<double>(s.size());
  auto nll = [&](double b) { return -brody_log_likelihood(b, sum_log, n, s); };
  std::uintmax_t iters = cfg.max_iterations;
  const auto [b_hat, f_hat] = boost::math::tools::brent_find_minima(nll, cfg.b_min, cfg.b_max, 40, iters);
  if (iters >= cfg.max_iterations) throw NumericalError("brody_fit: likelihood maximisation did not converge");

  BrodyFit fit;
  fit.b = b_hat;
  fit.alpha = brody_alpha(b_hat);
  fit.n_spacings = s.size();
  fit.log_likelihood = -f_hat;
  const double h = 1e-4;
  const double curvature = (nll(b_hat + h) + nll(b_hat - h) - 2.0 * f_hat) / (h * h);
  fit.stderr_b = curvature > 0.0 ? 1.0 / std::sqrt(curvature) : std::numeric_limits<double>::infinity();
  return fit;
}

inline BrodyFit brody_fit(const SpacingEnsemble& ens, const BrodyFitConfig& cfg = {}) {
  return brody_fit(ens.spacings, cfg);
}

struct SpacingHistogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::vector<double> density;  // counts / (n * width)
};

inline SpacingHistogram spacing_histogram(const std::vector<double>& s, int bins, double s_max) {
  if (bins < 1 || !(s_max > 0.0)) throw ConfigError("spacing_histogram: need bins >= 1 and s_max > 0");
  SpacingHistogram h;
  const double w = s_max / bins;
  for (int k = 0; k <= bins; ++k) h.edges.push_back(k * w);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : s) {
    const auto k = static_cast<long>(std::floor(v / w));
    if (k >= 0 && k < bins) ++h.counts[static_cast<std::size_t>(k)];
  }
  for (std::size_t c : h.counts) h.density.push_back(s.empty() ? 0.0 : c / (static_cast<double>(s.size()) * w));
  return h;
}

}  // namespace trimode

#endif  // TRIMODE_SPECTRAL_HPP
