#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "qcorr/rates.hpp"

using namespace qcorr;

namespace {

// A small configuration that still resolves rates to a few percent.
SweepConfig quick(std::vector<double> betas) {
  SweepConfig cfg;
  cfg.betas = std::move(betas);
  cfg.ensemble_size = 8;
  cfg.horizon = 6.0;
  cfg.env_dt = 2e-3;
  cfg.quenched.spatial_points = 48;
  cfg.start_points = 5;
  cfg.fit_window = FitWindow{1.5, 6.0};
  cfg.master_seed = 2024;
  return cfg;
}

SurvivalCurve synthetic(const std::function<double(double)>& q, double t_max, double step) {
  SurvivalCurve c;
  for (double t = 0.0; t <= t_max + 1e-9; t += step) {
    c.time_grid.push_back(t);
    c.log_survival.push_back(q(t));
  }
  return c;
}

RateEstimate fake_estimate(double gamma, double half_width) {
  RateEstimate e;
  e.gamma = gamma;
  e.ci_low = gamma - half_width;
  e.ci_high = gamma + half_width;
  e.ci_defined = true;
  return e;
}

}  // namespace

TEST(ExtractRate, ClassicalCurves) {
  const auto c = synthetic([](double t) { return -log_band_survival_fixed(0.5, {0, 1}, t); }, 20.0, 0.05);
  const auto r = extract_rate({c, c, c}, {5.0, 20.0});
  EXPECT_NEAR(r.gamma / (0.5 * kPi2), 1.0, 5e-3);
  EXPECT_NEAR(r.gamma, 0.5 * kPi2, 1e-9);
  EXPECT_TRUE(r.ci_defined);
  EXPECT_FALSE(r.low_quality);
  EXPECT_NEAR(r.increment_rate, 0.5 * kPi2, 1e-9);
  EXPECT_EQ(r.n_environments, 3u);
}

TEST(ExtractRate, WidthScalesGamma) {
  const BandSpec band(0.0, 2.0);
  const auto c = synthetic([&](double t) { return -log_band_survival_fixed(1.0, band, t); }, 40.0, 0.1);
  const auto r = extract_rate({c, c}, {10.0, 40.0}, 2.0);
  EXPECT_NEAR(r.gamma_over_L2, 0.125 * kPi2, 1e-9);
  EXPECT_NEAR(r.gamma, 0.5 * kPi2, 1e-9);
}

TEST(ExtractRate, LinearPlusSine) {
  const auto c = synthetic([](double t) { return 3.0 * t + std::sin(t); }, 100.0, 0.01);
  const auto r = extract_rate({c}, {10.0, 100.0});
  EXPECT_NEAR(r.gamma, 3.0, 0.05);
}

TEST(ExtractRate, SingleCurveHasUndefinedInterval) {
  const auto c = synthetic([](double t) { return 2.0 * t; }, 10.0, 0.1);
  const auto r = extract_rate({c}, {2.0, 10.0});
  EXPECT_FALSE(r.ci_defined);
  EXPECT_NEAR(r.gamma, 2.0, 1e-12);
}

TEST(ExtractRate, LowQualityFlag) {
  const auto curved = synthetic([](double t) { return t * t; }, 10.0, 0.1);
  const auto line = synthetic([](double t) { return t; }, 10.0, 0.1);
  EXPECT_FALSE(extract_rate({line, line}, {1.0, 10.0}).low_quality);
  const auto noisy = synthetic([](double t) { return 0.1 * t + std::sin(40.0 * t); }, 10.0, 0.01);
  EXPECT_TRUE(extract_rate({noisy, line}, {1.0, 10.0}).low_quality);
  EXPECT_GT(extract_rate({curved, curved}, {1.0, 10.0}).r_squared, 0.9);
}

TEST(ExtractRate, RejectsBadWindows) {
  const auto c = synthetic([](double t) { return t; }, 10.0, 0.1);
  EXPECT_THROW(extract_rate({c}, {0.5, 5.0}), ParameterError);
  EXPECT_THROW(extract_rate({c}, {5.0, 5.0}), ParameterError);
  EXPECT_THROW(extract_rate({c}, {5.0, 20.0}), ParameterError);
  EXPECT_THROW(extract_rate({}, {2.0, 5.0}), ParameterError);
}

TEST(ExtractRate, PureFunction) {
  const auto a = synthetic([](double t) { return 1.7 * t + std::cos(t); }, 10.0, 0.1);
  const auto b = synthetic([](double t) { return 1.9 * t; }, 10.0, 0.1);
  const auto r1 = extract_rate({a, b}, {2.0, 10.0});
  const auto r2 = extract_rate({a, b}, {2.0, 10.0});
  EXPECT_EQ(r1.gamma, r2.gamma);
  EXPECT_EQ(r1.ci_low, r2.ci_low);
  EXPECT_EQ(r1.slopes, r2.slopes);
}

TEST(GammaSweep, ClassicalPoint) {
  const auto res = gamma_sweep(quick({0.0}));
  const auto& e = res.curve.estimates.front();
  EXPECT_NEAR(e.gamma, 0.5 * kPi2, 1e-3 * 0.5 * kPi2);
  EXPECT_EQ(res.ensembles.front().curves.size(), 8u);
  EXPECT_TRUE(property_report(res.curve).find("gamma0_classical")->status == CheckStatus::pass);
}

TEST(GammaSweep, MirroredSeedsGiveEvenCurve) {
  const auto res = gamma_sweep(quick({-0.5, 0.5}));
  const auto& neg = res.curve.estimates[0];
  const auto& pos = res.curve.estimates[1];
  EXPECT_NEAR(neg.gamma, pos.gamma, 1e-9);
  EXPECT_NEAR(neg.ci_low, pos.ci_low, 1e-9);
  for (std::size_t i = 0; i < res.ensembles[0].seeds.size(); ++i)
    EXPECT_EQ(res.ensembles[0].seeds[i], mirror_seed(res.ensembles[1].seeds[i]));
  EXPECT_EQ(property_report(res.curve).find("evenness")->status, CheckStatus::pass);
}

TEST(GammaSweep, IncreasingInBeta) {
  const auto res = gamma_sweep(quick({0.0, 0.5, 1.0}));
  const auto& est = res.curve.estimates;
  EXPECT_LT(est[0].gamma, est[1].gamma);
  EXPECT_LT(est[1].gamma, est[2].gamma);
  const auto rep = property_report(res.curve);
  EXPECT_EQ(rep.find("monotone_nonnegative")->status, CheckStatus::consistent);
  EXPECT_EQ(rep.find("annealed_lower_bound")->status, CheckStatus::pass);
  EXPECT_EQ(rep.find("gamma1_upper_bound")->status, CheckStatus::pass);
  EXPECT_TRUE(rep.passed());
}

TEST(GammaSweep, WorkerCountInvariant) {
  auto cfg = quick({0.75});
  cfg.workers = 1;
  const auto a = gamma_sweep(cfg);
  cfg.workers = 3;
  const auto b = gamma_sweep(cfg);
  EXPECT_EQ(a.curve.estimates[0].slopes, b.curve.estimates[0].slopes);
  for (std::size_t i = 0; i < a.ensembles[0].curves.size(); ++i)
    EXPECT_EQ(a.ensembles[0].curves[i].log_survival, b.ensembles[0].curves[i].log_survival);
}

TEST(GammaSweep, InfAndSupVariantsAgree) {
  auto cfg = quick({0.5});
  const auto bar = gamma_sweep(cfg).curve.estimates[0];
  cfg.variant = SurvivalVariant::sup_start;
  const auto under = gamma_sweep(cfg).curve.estimates[0];
  EXPECT_LE(std::abs(bar.gamma - under.gamma), bar.half_width() + under.half_width());
}

TEST(GammaSweep, TerminalWindowIndependence) {
  auto cfg = quick({0.5});
  cfg.variant = SurvivalVariant::pointwise;
  cfg.corridor = Corridor::constant(0.0, 1.0, {0.5, 0.5}, {0.3, 0.7}, 0.0);
  const auto narrow = gamma_sweep(cfg).curve.estimates[0];
  cfg.corridor = Corridor::constant(0.0, 1.0, {0.5, 0.5}, {0.05, 0.95}, 0.0);
  const auto wide = gamma_sweep(cfg).curve.estimates[0];
  EXPECT_LE(std::abs(narrow.gamma - wide.gamma), std::hypot(narrow.half_width(), wide.half_width()));
}

TEST(GammaSweep, IntervalShrinksWithEnsemble) {
  auto cfg = quick({1.0});
  cfg.variant = SurvivalVariant::pointwise;
  cfg.ensemble_size = 128;
  const auto all = gamma_sweep(cfg).curve.estimates[0].slopes;
  auto se = [&](std::size_t n) {
    return stats::standard_error(std::span<const double>(all.data(), n));
  };
  // Replicas are nested, so prefixes are the smaller ensembles.
  const double r1 = se(8) / se(32), r2 = se(32) / se(128);
  EXPECT_GT(r1, 2.0 / 1.8);
  EXPECT_LT(r1, 2.0 * 1.8);
  EXPECT_GT(r2, 2.0 / 1.4);
  EXPECT_LT(r2, 2.0 * 1.4);
}

TEST(GammaSweep, RejectsBadConfig) {
  auto cfg = quick({0.5, 0.25});
  EXPECT_THROW(gamma_sweep(cfg), ParameterError);
  cfg = quick({0.5});
  cfg.ensemble_size = 4;
  EXPECT_THROW(gamma_sweep(cfg), ParameterError);
  cfg = quick({0.5});
  cfg.fit_window = FitWindow{0.5, 6.0};
  EXPECT_THROW(gamma_sweep(cfg), ParameterError);
}

TEST(PropertyReport, ClassicalOnlyCurve) {
  GammaCurve curve;
  curve.betas = {0.0};
  curve.estimates = {fake_estimate(0.5 * kPi2, 0.0)};
  const auto rep = property_report(curve);
  EXPECT_EQ(rep.find("gamma0_classical")->status, CheckStatus::pass);
  for (const char* name : {"annealed_lower_bound", "gamma1_upper_bound", "convexity", "monotone_nonnegative", "evenness"})
    EXPECT_EQ(rep.find(name)->status, CheckStatus::skipped) << name;
  EXPECT_TRUE(rep.passed());
}

TEST(PropertyReport, BoundsAtBetaOne) {
  GammaCurve curve;
  curve.betas = {1.0};
  curve.estimates = {fake_estimate(11.0, 0.4)};
  auto rep = property_report(curve);
  EXPECT_EQ(rep.find("annealed_lower_bound")->status, CheckStatus::pass);
  EXPECT_EQ(rep.find("gamma1_upper_bound")->status, CheckStatus::pass);
  curve.estimates = {fake_estimate(9.0, 0.5)};  // interval entirely below pi^2
  rep = property_report(curve);
  EXPECT_EQ(rep.find("annealed_lower_bound")->status, CheckStatus::fail);
  EXPECT_FALSE(rep.passed());
  curve.estimates = {fake_estimate(45.0, 1.0)};  // interval entirely above 4 pi^2
  EXPECT_EQ(property_report(curve).find("gamma1_upper_bound")->status, CheckStatus::fail);
}

TEST(PropertyReport, ConvexityAndMonotonicity) {
  GammaCurve curve;
  curve.betas = {0.0, 0.5, 1.0};
  curve.estimates = {fake_estimate(0.5 * kPi2, 0.0), fake_estimate(6.2, 0.1), fake_estimate(10.9, 0.2)};
  auto rep = property_report(curve);
  EXPECT_EQ(rep.find("convexity")->status, CheckStatus::pass);
  EXPECT_EQ(rep.find("monotone_nonnegative")->status, CheckStatus::consistent);
  curve.estimates[1] = fake_estimate(9.0, 0.1);  // above the chord
  rep = property_report(curve);
  EXPECT_EQ(rep.find("convexity")->status, CheckStatus::fail);
  curve.estimates[1] = fake_estimate(4.9, 0.1);  // not increasing, and not a property failure
  rep = property_report(curve);
  EXPECT_EQ(rep.find("monotone_nonnegative")->status, CheckStatus::inconsistent);
}

TEST(WidthScaling, ClassicalInvariance) {
  const auto rep = width_scaling_check({0.5, 1.0, 2.0}, 0.0, quick({0.0}));
  ASSERT_EQ(rep.estimates.size(), 3u);
  for (const auto& e : rep.estimates) EXPECT_NEAR(e.gamma / (0.5 * kPi2), 1.0, 1e-2);
  EXPECT_LT(rep.max_relative_spread, 1e-2);
}

TEST(WidthScaling, RepeatedWidthIsIdentical) {
  const auto rep = width_scaling_check({1.0, 1.0}, 1.0, quick({1.0}));
  EXPECT_EQ(rep.estimates[0].gamma, rep.estimates[1].gamma);
  EXPECT_EQ(rep.estimates[0].slopes, rep.estimates[1].slopes);
  EXPECT_TRUE(rep.consistent);
}

TEST(WidthScaling, MatchedSeedsAtBetaOne) {
  const auto rep = width_scaling_check({1.0, 2.0}, 1.0, quick({1.0}));
  const auto& a = rep.estimates[0];
  const auto& b = rep.estimates[1];
  // Slopes in time scale by 1/L^2, so the slope ratio is 4.
  const double ratio = a.gamma_over_L2 / b.gamma_over_L2;
  const double rel = std::hypot(a.half_width() / a.gamma, b.half_width() / b.gamma);
  EXPECT_NEAR(ratio, 4.0, 4.0 * rel);
  EXPECT_TRUE(rep.consistent);
}

TEST(Audit, ClassicalCaseExact) {
  const auto env = sample_environment(1, 5.0, 1e-2, 0.0);
  const auto corridor = Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 0.0);
  QuenchedOptions o;
  o.spatial_points = 64;
  const auto rep = subadditivity_audit(env, corridor, {1, 2, 3, 4, 5}, o);
  EXPECT_EQ(rep.pairs, 10u);
  EXPECT_LT(rep.max_violation, 1e-10);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.checkpoints.front(), 0.0);
}

TEST(Audit, RandomEnvironmentsHaveNoViolations) {
  const auto corridor = Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 1.0);
  QuenchedOptions o;
  o.spatial_points = 64;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto env = sample_environment(s, 6.0, 2e-3, 1.0);
    const auto rep = subadditivity_audit(env, corridor, {1, 2, 3, 4, 5, 6}, o);
    EXPECT_EQ(rep.pairs, 15u);
    EXPECT_EQ(rep.violations, 0u) << "seed " << s << " max " << rep.max_violation;
  }
}

TEST(Audit, EntriesMatchForwardSweep) {
  // q_{0,n} from the audit matches x_bar at n with terminal window = start window.
  const auto env = sample_environment(7, 3.0, 2e-3, 1.0);
  const auto corridor = Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 1.0);
  QuenchedOptions o;
  o.spatial_points = 64;
  const auto rep = subadditivity_audit(env, corridor, {1, 2, 3}, o);
  for (std::size_t j = 1; j < rep.checkpoints.size(); ++j) {
    const double t = rep.checkpoints[j];
    const auto env_t = sample_environment(7, t, 2e-3, 1.0);
    const double fwd = x_bar(env_t, corridor, t, 33, o).final_value();
    EXPECT_NEAR(rep.q[0][j] / fwd, 1.0, 0.02) << "t=" << t;
  }
}

TEST(Audit, UnitIncrementsAreStationary) {
  const auto corridor = Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 1.0);
  QuenchedOptions o;
  o.spatial_points = 48;
  std::vector<double> first, later;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto env = sample_environment(label_seed(99, 1.0, s), 4.0, 2e-3, 1.0);
    const auto rep = subadditivity_audit(env, corridor, {1, 2, 3, 4}, o);
    first.push_back(rep.q[0][1]);
    for (std::size_t m = 1; m + 1 < rep.checkpoints.size(); ++m) later.push_back(rep.q[m][m + 1]);
  }
  EXPECT_LT(stats::ks_statistic(first, later), stats::ks_critical_1pct(first.size(), later.size()));
}

TEST(Audit, RequiresMatchingWindows) {
  const auto env = sample_environment(1, 3.0, 1e-2, 1.0);
  EXPECT_THROW(subadditivity_audit(env, Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.0, 1.0}, 1.0), {1, 2}),
               ParameterError);
  EXPECT_THROW(subadditivity_audit(env, Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 1.0), {2, 1}),
               ParameterError);
}

TEST(GammaCurveOutput, RecordsAndJson) {
  GammaCurve curve;
  curve.betas = {0.0, 1.0};
  curve.estimates = {fake_estimate(4.9348, 0.0), fake_estimate(11.0, 0.3)};
  curve.provenance = "test";
  std::stringstream ss;
  write_gamma_curve(ss, curve);
  std::string line;
  int records = 0;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') ++records;
  EXPECT_EQ(records, 2);
  const auto j = to_json(curve);
  ASSERT_EQ(j["estimates"].size(), 2u);
  EXPECT_EQ(j["estimates"][1]["beta"], 1.0);
  EXPECT_EQ(j["provenance"], "test");
  EXPECT_TRUE(to_json(property_report(curve)).is_object() || to_json(property_report(curve)).is_array());
}
