#pragma once

// Closed-form kernels for Brownian motion killed on leaving a fixed band.
//
// Every quantity has two series representations: the method of images
// (fast for short times) and the sine eigenfunction expansion (fast for long
// times). The switch happens at t* = L^2 / pi^2 for a band of width L.
// Truncation: a series stops once the next term (or symmetric pair of image
// terms) is no larger than relative_tolerance times the partial sum and the
// terms are decreasing.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcorr/errors.hpp"

namespace qcorr {

struct BandSpec {
  double lower = 0.0;
  double upper = 1.0;

  BandSpec() = default;
  BandSpec(double a, double b) : lower(a), upper(b) {
    require(std::isfinite(a) && std::isfinite(b) && a < b, "band requires lower < upper");
  }

  double width() const noexcept { return upper - lower; }
  double center() const noexcept { return 0.5 * (lower + upper); }
  bool interior(double x) const noexcept { return x > lower && x < upper; }
};

struct SeriesConfig {
  double relative_tolerance = 1e-13;
  int max_terms = 512;

  void validate() const {
    require(relative_tolerance > 0.0 && relative_tolerance < 1.0, "series tolerance must lie in (0,1)");
    require(max_terms >= 8, "series max_terms must be at least 8");
  }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {

inline double switch_time(double width) { return width * width / (std::numbers::pi * std::numbers::pi); }

inline double gauss(double z, double t) {
  return std::exp(-z * z / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

/// P(lo <= sqrt(t) Z <= hi), accurate in both tails.
inline double normal_interval(double lo, double hi, double t) {
  if (hi <= lo) return 0.0;
  const double s = std::sqrt(2.0 * t);
  if (lo >= 0.0) return 0.5 * (std::erfc(lo / s) - std::erfc(hi / s));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi / s) - std::erfc(-lo / s));
  return 0.5 * (std::erf(hi / s) - std::erf(lo / s));
}

// Sums term(0) + sum_{k>=1} (term(k) + term(-k)).
template <class Term>
double image_sum(Term&& term, const SeriesConfig& cfg, const char* what) {
  double sum = term(0);
  double prev = std::abs(sum);
  for (int k = 1; k < cfg.max_terms; ++k) {
    const double pair = term(k) + term(-k);
    sum += pair;
    const double mag = std::abs(pair);
    if (mag <= cfg.relative_tolerance * std::abs(sum) && mag <= prev) return sum;
    prev = mag;
  }
  throw NumericalError(std::string(what) + ": image series did not converge", sum, prev);
}

// Sums value(n) over n = first, first+step, ...; envelope(n) bounds |value(n)|.
template <class Value, class Envelope>
double eigen_sum(Value&& value, Envelope&& envelope, int first, int step, const SeriesConfig& cfg,
                 const char* what) {
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0, n = first; i < cfg.max_terms; ++i, n += step) {
    const double env = envelope(n);
    if (env == 0.0) return sum;
    sum += value(n);
    if (env <= cfg.relative_tolerance * std::abs(sum) && env <= prev && i > 0) return sum;
    prev = env;
  }
  throw NumericalError(std::string(what) + ": eigenseries did not converge", sum, prev);
}

// sum_{n odd} (4/(n pi)) sin(n pi u) exp(-(n^2-1) lambda t); survival = exp(-lambda t) * this.
inline double survival_eigen_reduced(double u, double lt, const SeriesConfig& cfg) {
  const double pi = std::numbers::pi;
  return eigen_sum([&](int n) { return 4.0 / (n * pi) * std::sin(n * pi * u) * std::exp(-(n * n - 1.0) * lt); },
                   [&](int n) { return 4.0 / (n * pi) * std::exp(-(n * n - 1.0) * lt); }, 1, 2, cfg,
                   "band survival");
}

// (2/L) sum_{n>=1} sin(n pi u) sin(n pi v) exp(-(n^2-1) lambda t); density = exp(-lambda t) * this.
inline double density_eigen_reduced(double u, double v, double width, double lt, const SeriesConfig& cfg) {
  const double pi = std::numbers::pi;
  return eigen_sum(
      [&](int n) { return 2.0 / width * std::sin(n * pi * u) * std::sin(n * pi * v) * std::exp(-(n * n - 1.0) * lt); },
      [&](int n) { return 2.0 / width * std::exp(-(n * n - 1.0) * lt); }, 1, 1, cfg, "absorbing density");
}

inline double density_images(double x, double y, const BandSpec& band, double t, const SeriesConfig& cfg) {
  const double L = band.width();
  const double dx = x - band.lower;
  const double dy = y - band.lower;
  return image_sum(
      [&](int k) {
        const double shift = 2.0 * k * L;
        const double e = -2.0 * dx * (dy + shift) / t;
        if (e > 0.0) return gauss(y - x + shift, t) - gauss(y + x - 2.0 * band.lower + shift, t);
        return gauss(y - x + shift, t) * -std::expm1(e);
      },
      cfg, "absorbing density");
}

inline double survival_images(double x, const BandSpec& band, double t, const SeriesConfig& cfg) {
  const double L = band.width();
  const double lo = band.lower - x;
  const double hi = band.upper - x;
  const double d = x - band.lower;
  return image_sum(
      [&](int k) {
        const double shift = 2.0 * k * L;
        return normal_interval(lo + shift, hi + shift, t) - normal_interval(d + shift, d + L + shift, t);
      },
      cfg, "band survival");
}

inline double survival_eigen(double x, const BandSpec& band, double t, const SeriesConfig& cfg) {
  const double L = band.width();
  const double lambda = std::numbers::pi * std::numbers::pi / (2.0 * L * L);
  return std::exp(-lambda * t) * survival_eigen_reduced((x - band.lower) / L, lambda * t, cfg);
}

}  // namespace detail

/// P^x(B_s in [a,b] for all s <= t).
inline double band_survival_fixed(double x, const BandSpec& band, double t, const SeriesConfig& cfg = {}) {
  require(t >= 0.0, "survival time must be non-negative");
  cfg.validate();
  if (!band.interior(x)) return 0.0;
  if (t == 0.0) return 1.0;
  const double L = band.width();
  if (t >= detail::switch_time(L)) {
    return std::clamp(detail::survival_eigen(x, band, t, cfg), 0.0, 1.0);
  }
  return std::clamp(detail::survival_images(x, band, t, cfg), 0.0, 1.0);
}

/// Natural log of band_survival_fixed without underflow at long times.
inline double log_band_survival_fixed(double x, const BandSpec& band, double t, const SeriesConfig& cfg = {}) {
  require(t >= 0.0, "survival time must be non-negative");
  cfg.validate();
  if (!band.interior(x)) return kNegInf;
  if (t == 0.0) return 0.0;
  const double L = band.width();
  if (t >= detail::switch_time(L)) {
    const double lambda = std::numbers::pi * std::numbers::pi / (2.0 * L * L);
    const double r = detail::survival_eigen_reduced((x - band.lower) / L, lambda * t, cfg);
    return r > 0.0 ? std::min(0.0, -lambda * t + std::log(r)) : kNegInf;
  }
  const double s = band_survival_fixed(x, band, t, cfg);
  return s > 0.0 ? std::log(s) : kNegInf;
}

/// Sub-probability transition density of Brownian motion killed on exit from the band.
inline double absorbing_density(double x, double y, const BandSpec& band, double t, const SeriesConfig& cfg = {}) {
  require(t > 0.0, "transition time must be positive");
  if (!band.interior(x) || !band.interior(y)) return 0.0;
  const double L = band.width();
  if (t >= detail::switch_time(L)) {
    const double lambda = std::numbers::pi * std::numbers::pi / (2.0 * L * L);
    return std::max(0.0, std::exp(-lambda * t) *
                             detail::density_eigen_reduced((x - band.lower) / L, (y - band.lower) / L, L, lambda * t, cfg));
  }
  return std::max(0.0, detail::density_images(x, y, band, t, cfg));
}

inline double log_absorbing_density(double x, double y, const BandSpec& band, double t, const SeriesConfig& cfg = {}) {
  require(t > 0.0, "transition time must be positive");
  if (!band.interior(x) || !band.interior(y)) return kNegInf;
  const double L = band.width();
  if (t >= detail::switch_time(L)) {
    const double lambda = std::numbers::pi * std::numbers::pi / (2.0 * L * L);
    const double r = detail::density_eigen_reduced((x - band.lower) / L, (y - band.lower) / L, L, lambda * t, cfg);
    return r > 0.0 ? -lambda * t + std::log(r) : kNegInf;
  }
  const double d = detail::density_images(x, y, band, t, cfg);
  return d > 0.0 ? std::log(d) : kNegInf;
}

/// Probability that a Brownian bridge from x to y over time dt stays inside the band.
inline double bridge_band_survival(double x, double y, const BandSpec& band, double dt, const SeriesConfig& cfg = {}) {
  require(dt > 0.0, "bridge duration must be positive");
  if (!band.interior(x) || !band.interior(y)) return 0.0;
  const double L = band.width();
  if (dt >= detail::switch_time(L)) {
    const double ld = log_absorbing_density(x, y, band, dt, cfg);
    const double lg = -(y - x) * (y - x) / (2.0 * dt) - 0.5 * std::log(2.0 * std::numbers::pi * dt);
    return std::clamp(std::exp(ld - lg), 0.0, 1.0);
  }
  const double dx = x - band.lower;
  const double dy = y - band.lower;
  const double s = detail::image_sum(
      [&](int k) {
        if (k == 0) return -std::expm1(-2.0 * dx * dy / dt);
        const double kl = k * L;
        return std::exp(-2.0 * kl * (kl + y - x) / dt) - std::exp(-2.0 * (kl + dx) * (kl + dy) / dt);
      },
      cfg, "bridge survival");
  return std::clamp(s, 0.0, 1.0);
}

inline double log_bridge_band_survival(double x, double y, const BandSpec& band, double dt, const SeriesConfig& cfg = {}) {
  require(dt > 0.0, "bridge duration must be positive");
  if (!band.interior(x) || !band.interior(y)) return kNegInf;
  const double L = band.width();
  if (dt >= detail::switch_time(L)) {
    const double ld = log_absorbing_density(x, y, band, dt, cfg);
    const double lg = -(y - x) * (y - x) / (2.0 * dt) - 0.5 * std::log(2.0 * std::numbers::pi * dt);
    return std::min(0.0, ld - lg);
  }
  const double s = bridge_band_survival(x, y, band, dt, cfg);
  return s > 0.0 ? std::log(s) : kNegInf;
}

/// Killed transition density with constant drift -slope, via the
/// Cameron-Martin factor exp(slope (x - y) - slope^2 dt / 2).
inline double tilted_density(double x, double y, const BandSpec& band, double dt, double slope,
                             const SeriesConfig& cfg = {}) {
  const double ld = log_absorbing_density(x, y, band, dt, cfg);
  if (ld == kNegInf) return 0.0;
  return std::exp(ld + slope * (x - y) - 0.5 * slope * slope * dt);
}

/// Matrix of tilted_density(x_grid[i], y_grid[j]).
inline Eigen::MatrixXd tilted_propagator(std::span<const double> x_grid, std::span<const double> y_grid,
                                         const BandSpec& band, double dt, double slope, const SeriesConfig& cfg = {}) {
  require(dt > 0.0, "propagator step must be positive");
  cfg.validate();
  for (double x : x_grid) require(band.interior(x), "propagator source grid must lie inside the open band");
  for (double y : y_grid) require(band.interior(y), "propagator target grid must lie inside the open band");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x_grid.size()), static_cast<Eigen::Index>(y_grid.size()));
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    for (std::size_t j = 0; j < y_grid.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = tilted_density(x_grid[i], y_grid[j], band, dt, slope, cfg);
  return m;
}

/// Density of the first exit time of Brownian motion from (-delta, delta), started at 0.
inline double first_exit_density_two_sided(double delta, double t, const SeriesConfig& cfg = {}) {
  require(delta > 0.0, "exit half-width must be positive");
  require(t > 0.0, "exit time must be positive");
  cfg.validate();
  const double pi = std::numbers::pi;
  const double d2 = delta * delta;
  if (t < 4.0 * d2 / (pi * pi)) {
    const double pref = 2.0 * delta / std::sqrt(2.0 * pi * t * t * t);
    const double s = detail::image_sum(
        [&](int n) {
          const double m = 4.0 * n + 1.0;
          return m * std::exp(-m * m * d2 / (2.0 * t));
        },
        cfg, "exit density");
    return std::max(0.0, pref * s);
  }
  const double rate = pi * pi / (8.0 * d2);
  const double s = detail::eigen_sum(
      [&](int k) { return ((k / 2) % 2 == 0 ? 1.0 : -1.0) * k * std::exp(-k * k * rate * t); },
      [&](int k) { return k * std::exp(-k * k * rate * t); }, 1, 2, cfg, "exit density");
  return std::max(0.0, pi / (2.0 * d2) * s);
}

}  // namespace qcorr
