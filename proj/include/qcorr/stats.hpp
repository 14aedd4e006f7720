#pragma once

// Small statistics toolkit: least squares, Student-t intervals, F and
// Kolmogorov-Smirnov tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "qcorr/errors.hpp"

namespace qcorr::stats {

inline double mean(std::span<const double> x) {
  require(!x.empty(), "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  require(x.size() >= 2, "variance needs at least two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double standard_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "line fit needs matching samples of size >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

/// Quantile of Student's t with `dof` degrees of freedom.
inline double t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t(dof), p);
}

struct Interval {
  double centre = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool defined = false;
};

/// Two-sided Student-t interval for the mean.
inline Interval t_interval(std::span<const double> x, double level = 0.95) {
  Interval ci;
  ci.centre = mean(x);
  if (x.size() < 2) {
    ci.low = ci.high = ci.centre;
    return ci;
  }
  const double half = t_quantile(0.5 + 0.5 * level, static_cast<double>(x.size() - 1)) * standard_error(x);
  ci.low = ci.centre - half;
  ci.high = ci.centre + half;
  ci.defined = true;
  return ci;
}

/// Two-sided F test p-value for equality of variances.
inline double f_test_p_value(double var1, std::size_t n1, double var2, std::size_t n2) {
  require(var1 > 0.0 && var2 > 0.0 && n1 >= 2 && n2 >= 2, "F test needs positive variances and n >= 2");
  const boost::math::fisher_f dist(static_cast<double>(n1 - 1), static_cast<double>(n2 - 1));
  const double f = var1 / var2;
  const double lower = boost::math::cdf(dist, f);
  return std::min(1.0, 2.0 * std::min(lower, 1.0 - lower));
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  require(!sample.empty(), "KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic Kolmogorov distribution quantile at the 1% level.
inline constexpr double kKolmogorov99 = 1.6276;

inline double ks_critical_1pct(std::size_t n) { return kKolmogorov99 / std::sqrt(static_cast<double>(n)); }

inline double ks_critical_1pct(std::size_t n, std::size_t m) {
  const auto a = static_cast<double>(n);
  const auto b = static_cast<double>(m);
  return kKolmogorov99 * std::sqrt((a + b) / (a * b));
}

}  // namespace qcorr::stats
