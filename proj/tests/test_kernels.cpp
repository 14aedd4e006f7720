#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "oracle_values.hpp"
#include "qcorr/kernels.hpp"

using namespace qcorr;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> midpoints(double lo, double hi, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
  return x;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

}  // namespace

TEST(BandSurvival, BoundaryAndOrigin) {
  const BandSpec band(0.0, 1.0);
  for (double t : {1e-6, 0.01, 1.0, 100.0}) {
    EXPECT_EQ(band_survival_fixed(0.0, band, t), 0.0);
    EXPECT_EQ(band_survival_fixed(1.0, band, t), 0.0);
    EXPECT_EQ(band_survival_fixed(-0.3, band, t), 0.0);
    EXPECT_EQ(log_band_survival_fixed(1.0, band, t), kNegInf);
  }
  EXPECT_EQ(band_survival_fixed(0.4, band, 0.0), 1.0);
  EXPECT_THROW(band_survival_fixed(0.4, band, -1.0), ParameterError);
  EXPECT_THROW(BandSpec(1.0, 1.0), ParameterError);
}

TEST(BandSurvival, HighPrecisionReferences) {
  EXPECT_NEAR(band_survival_fixed(0.5, {0, 1}, 0.5), oracle::kSurvivalMid05, 1e-13);
  EXPECT_NEAR(band_survival_fixed(0.5, {0, 1}, 5.0) / oracle::kSurvivalMid5, 1.0, 1e-12);
  EXPECT_NEAR(band_survival_fixed(0.2, {0, 1}, 1.0) / oracle::kSurvival02t1, 1.0, 1e-12);
  EXPECT_NEAR(band_survival_fixed(-0.3, {-1.5, 0.5}, 0.07), oracle::kSurvivalShifted, 1e-13);
  EXPECT_NEAR(band_survival_fixed(0.5, {0, 1}, 0.001), oracle::kSurvivalTiny, 1e-13);
  EXPECT_NEAR(log_band_survival_fixed(0.5, {0, 1}, 5.0), std::log(oracle::kSurvivalMid5), 1e-11);
}

TEST(BandSurvival, ProbabilityRangeAndReflection) {
  const BandSpec band(-0.7, 1.3);
  for (double t : {1e-4, 0.03, 0.2, 0.4, 1.0, 7.0})
    for (int i = 1; i < 40; ++i) {
      const double x = band.lower + band.width() * i / 40.0;
      const double s = band_survival_fixed(x, band, t);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
      EXPECT_NEAR(s, band_survival_fixed(band.lower + band.upper - x, band, t), 1e-14);
    }
}

TEST(BandSurvival, NonIncreasingInTime) {
  const BandSpec band(0.0, 1.0);
  double prev = 1.0;
  for (double t = 0.001; t < 3.0; t *= 1.1) {
    const double s = band_survival_fixed(0.3, band, t);
    EXPECT_LE(s, prev + 1e-15);
    prev = s;
  }
}

TEST(BandSurvival, ClassicalDecayRate) {
  const BandSpec band(0.0, 1.0);
  const double rate = kPi * kPi / 2.0;
  // Log-slope at t = 5; the prefactor ln(4/pi) needs t >= 50 before -ln S / t itself is within 0.1%.
  const double slope = log_band_survival_fixed(0.5, band, 5.0) - log_band_survival_fixed(0.5, band, 6.0);
  EXPECT_NEAR(slope / rate, 1.0, 1e-3);
  EXPECT_NEAR(-log_band_survival_fixed(0.5, band, 60.0) / 60.0 / rate, 1.0, 1e-3);
  EXPECT_NEAR(log_band_survival_fixed(0.5, band, 5.0), -rate * 5.0 + std::log(4.0 / kPi), 1e-9);
  const double deep = log_band_survival_fixed(0.5, band, 1e4);
  EXPECT_TRUE(std::isfinite(deep));
  EXPECT_NEAR(deep, -rate * 1e4 + std::log(4.0 / kPi), 1e-8 * rate * 1e4);
}

TEST(BandSurvival, MatchesMonteCarlo) {
  const double s = band_survival_fixed(0.5, {0, 1}, 0.5);
  EXPECT_LT(std::abs(s - oracle::kMcSurvival), 3.0 * oracle::kMcSurvivalSe);
}

TEST(BandSurvival, RegimesAgreeInOverlap) {
  for (double L : {0.5, 1.0, 3.0}) {
    const BandSpec band(-0.2, -0.2 + L);
    const double t0 = L * L / (2 * kPi * kPi), t1 = 2 * L * L / (kPi * kPi);
    for (int k = 0; k <= 10; ++k) {
      const double t = t0 + (t1 - t0) * k / 10.0;
      for (double u : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        const double x = band.lower + u * L;
        EXPECT_NEAR(detail::survival_images(x, band, t, {}), detail::survival_eigen(x, band, t, {}), 1e-10);
      }
    }
  }
}

TEST(BandSurvival, NonConvergenceCarriesPartialSum) {
  SeriesConfig cfg;
  cfg.relative_tolerance = 1e-300;
  cfg.max_terms = 8;
  try {
    band_survival_fixed(0.5, {0, 1}, 0.5, cfg);
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NEAR(e.partial_sum(), oracle::kSurvivalMid05 * std::exp(kPi * kPi / 4.0), 1e-12);
    EXPECT_GT(e.tail_bound(), 0.0);
  }
  SeriesConfig bad;
  bad.max_terms = 2;
  EXPECT_THROW(band_survival_fixed(0.5, {0, 1}, 0.5, bad), ParameterError);
}

TEST(AbsorbingDensity, HighPrecisionReferences) {
  EXPECT_NEAR(absorbing_density(0.3, 0.6, {0, 1}, 0.25) / oracle::kDensityA, 1.0, 1e-12);
  EXPECT_NEAR(absorbing_density(0.1, 0.15, {0, 1}, 0.01) / oracle::kDensityB, 1.0, 1e-12);
  EXPECT_NEAR(log_absorbing_density(0.3, 0.6, {0, 1}, 0.25), std::log(oracle::kDensityA), 1e-12);
  EXPECT_EQ(absorbing_density(0.0, 0.5, {0, 1}, 0.25), 0.0);
}

TEST(AbsorbingDensity, SymmetricAndNonNegative) {
  const BandSpec band(0.0, 2.0);
  for (double t : {1e-3, 0.1, 0.5, 3.0})
    for (double x : {0.05, 0.5, 1.3})
      for (double y : {0.01, 0.7, 1.99}) {
        const double d = absorbing_density(x, y, band, t);
        EXPECT_GE(d, 0.0);
        EXPECT_NEAR(d, absorbing_density(y, x, band, t), 1e-12 * std::max(1.0, d));
        EXPECT_NEAR(d, absorbing_density(2.0 - x, 2.0 - y, band, t), 1e-12 * std::max(1.0, d));
      }
}

TEST(BridgeSurvival, OutsideBandIsZero) {
  const BandSpec band(0.0, 1.0);
  EXPECT_EQ(bridge_band_survival(-0.1, 0.5, band, 0.1), 0.0);
  EXPECT_EQ(bridge_band_survival(0.5, 1.0, band, 0.1), 0.0);
  EXPECT_EQ(bridge_band_survival(0.0, 0.5, band, 0.1), 0.0);
  EXPECT_EQ(log_bridge_band_survival(0.5, 1.2, band, 0.1), kNegInf);
}

TEST(BridgeSurvival, TendsToOneMonotonically) {
  const BandSpec band(0.0, 1.0);
  double prev = 0.0;
  for (double dt = 1.0; dt > 1e-6; dt *= 0.7) {
    const double s = bridge_band_survival(0.3, 0.3, band, dt);
    EXPECT_GE(s, prev);
    prev = s;
  }
  EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(BridgeSurvival, MatchesMonteCarlo) {
  const double s = bridge_band_survival(0.3, 0.6, {0, 1}, 0.25);
  EXPECT_LT(std::abs(s - oracle::kMcBridge), 3.0 * oracle::kMcBridgeSe);
}

TEST(BridgeSurvival, ConsistentWithDensityRatio) {
  const BandSpec band(0.0, 1.0);
  for (double dt : {0.01, 0.08, 0.3, 1.5})
    for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.05, 0.9}, std::pair{0.5, 0.5}}) {
      const double ratio = absorbing_density(x, y, band, dt) / detail::gauss(y - x, dt);
      EXPECT_NEAR(bridge_band_survival(x, y, band, dt), ratio, 1e-12);
      EXPECT_NEAR(log_bridge_band_survival(x, y, band, dt), std::log(ratio), 1e-10);
    }
}

TEST(TiltedPropagator, RowIntegralIsSurvival) {
  const BandSpec band(0.0, 1.0);
  const std::vector<double> x{0.5};
  double prev_err = 1.0;
  for (int n : {100, 200, 400}) {
    const auto y = midpoints(0.0, 1.0, n);
    const auto m = tilted_propagator(x, y, band, 0.05, 0.0);
    const double integral = m.sum() / n;
    const double err = std::abs(integral - band_survival_fixed(0.5, band, 0.05));
    EXPECT_LT(err, 5e-4 * (100.0 / n) * (100.0 / n));
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
}

TEST(TiltedPropagator, GroundModeAtLongTimes) {
  const double L = 1.5;
  const BandSpec band(-0.5, -0.5 + L);
  const double dt = 4 * L * L;
  const auto g = midpoints(band.lower, band.upper, 17);
  const auto m = tilted_propagator(g, g, band, dt, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double ground = 2.0 / L * std::sin(kPi * (g[i] - band.lower) / L) * std::sin(kPi * (g[j] - band.lower) / L) *
                            std::exp(-kPi * kPi * dt / (2 * L * L));
      EXPECT_NEAR(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / ground, 1.0, 1e-6);
    }
}

TEST(TiltedPropagator, DriftedHistogramMatchesMonteCarlo) {
  const BandSpec band(0.0, 1.0);
  const std::vector<double> x{0.5};
  constexpr int fine = 200;
  const auto drifted = tilted_propagator(x, midpoints(0.0, 1.0, 10 * fine), band, 0.05, 2.0);
  const auto plain = tilted_propagator(x, midpoints(0.0, 1.0, 10 * fine), band, 0.05, 0.0);
  int distinct = 0;
  for (int bin = 0; bin < 10; ++bin) {
    const double p = drifted.row(0).segment(bin * fine, fine).sum() / (10.0 * fine);
    const double p0 = plain.row(0).segment(bin * fine, fine).sum() / (10.0 * fine);
    EXPECT_LT(std::abs(p - oracle::kMcDriftBins[bin]), 3.0 * oracle::kMcDriftBinsSe[bin]) << "bin " << bin;
    if (std::abs(p0 - oracle::kMcDriftBins[bin]) > 3.0 * oracle::kMcDriftBinsSe[bin]) ++distinct;
  }
  EXPECT_GE(distinct, 5);  // the drift is visible to the Monte Carlo reference
}

TEST(TiltedPropagator, ChapmanKolmogorov) {
  const BandSpec band(-0.5, 0.5);
  constexpr int n = 400;
  const auto g = midpoints(band.lower, band.upper, n);
  const double h = band.width() / n;
  for (double slope : {0.0, 1.5}) {
    const auto half = tilted_propagator(g, g, band, 0.01, slope);
    const auto full = tilted_propagator(g, g, band, 0.02, slope);
    const Eigen::MatrixXd composed = h * half * half;
    EXPECT_LT((composed - full).cwiseAbs().maxCoeff() / full.maxCoeff(), 1e-4) << "slope " << slope;
  }
}

TEST(TiltedPropagator, RejectsGridOutsideBand) {
  const std::vector<double> inside{0.2, 0.5}, outside{0.0, 0.5};
  EXPECT_THROW(tilted_propagator(outside, inside, {0, 1}, 0.1, 0.0), ParameterError);
  EXPECT_THROW(tilted_propagator(inside, outside, {0, 1}, 0.1, 0.0), ParameterError);
  EXPECT_THROW(tilted_propagator(inside, inside, {0, 1}, 0.0, 0.0), ParameterError);
}

TEST(ExitDensity, HighPrecisionReferences) {
  EXPECT_NEAR(first_exit_density_two_sided(1.0, 1.0) / oracle::kExitDensity1, 1.0, 1e-12);
  EXPECT_NEAR(first_exit_density_two_sided(1.0, 0.1) / oracle::kExitDensity01, 1.0, 1e-12);
  EXPECT_NEAR(first_exit_density_two_sided(0.5, 3.0) / oracle::kExitDensity3, 1.0, 1e-10);
  EXPECT_THROW(first_exit_density_two_sided(0.0, 1.0), ParameterError);
  EXPECT_THROW(first_exit_density_two_sided(1.0, 0.0), ParameterError);
}

TEST(ExitDensity, NormalisedWithMeanDeltaSquared) {
  for (double delta : {0.3, 1.0, 2.0}) {
    const double d2 = delta * delta;
    auto p = [delta](double t) { return first_exit_density_two_sided(delta, t); };
    const double mass = integrate(p, 0.0, 1.5 * d2) + integrate(p, 1.5 * d2, 50 * d2);
    EXPECT_NEAR(mass, 1.0, 1e-6);
    auto tp = [&](double t) { return t * p(t); };
    const double mean = integrate(tp, 0.0, 1.5 * d2) + integrate(tp, 1.5 * d2, 50 * d2);
    EXPECT_NEAR(mean / d2, 1.0, 1e-4);
  }
}

TEST(ExitDensity, SmallTimeLeadingTerm) {
  for (double delta : {0.5, 1.0})
    for (double frac : {0.1, 0.05, 0.02}) {
      const double t = frac * delta * delta;
      const double lead = 2 * delta / std::sqrt(2 * kPi * t * t * t) * std::exp(-delta * delta / (2 * t));
      EXPECT_NEAR(first_exit_density_two_sided(delta, t) / lead, 1.0, 1e-6);
    }
}

TEST(ExitDensity, MatchesSurvivalDerivative) {
  const BandSpec band(-1.0, 1.0);
  for (double t : {0.2, 0.5, 1.0, 2.0}) {
    const double e = 1e-5;
    const double deriv = (band_survival_fixed(0.0, band, t - e) - band_survival_fixed(0.0, band, t + e)) / (2 * e);
    EXPECT_NEAR(first_exit_density_two_sided(1.0, t), deriv, 1e-7);
  }
}
