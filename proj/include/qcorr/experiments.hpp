#pragma once

// Scenario runners: small-deviation (scaled) corridors, functional corridors,
// the annealed comparison and the tail diagnostic for X-bar.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcorr/corridor.hpp"
#include "qcorr/env.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/format.hpp"
#include "qcorr/kernels.hpp"
#include "qcorr/parallel.hpp"
#include "qcorr/quenched.hpp"
#include "qcorr/rates.hpp"
#include "qcorr/seeds.hpp"
#include "qcorr/stats.hpp"

namespace qcorr {

struct ScenarioPoint {
  double t = 0.0;
  double value = 0.0;  // ensemble mean of the normalised log survival
  double standard_error = 0.0;
};

struct ScenarioResult {
  std::string scenario_id;
  nlohmann::json parameters = nlohmann::json::object();
  double observed_rate = 0.0;
  double predicted_rate = 0.0;
  double relative_error = 0.0;
  double observed_standard_error = 0.0;
  std::vector<ScenarioPoint> diagnostics;

  void finalise() { relative_error = std::abs(observed_rate - predicted_rate) / std::abs(predicted_rate); }
};

/// Shared knobs for the ensemble scenarios.
struct ScenarioOptions {
  int ensemble_size = 32;
  std::uint64_t master_seed = 1;
  QuenchedOptions quenched{};
  unsigned workers = 1;
};

namespace detail {

/// Mean over the last quarter (at least one point) of the diagnostics.
inline std::pair<double, double> last_quarter(const std::vector<ScenarioPoint>& pts) {
  require(!pts.empty(), "scenario produced no points");
  const std::size_t k = std::max<std::size_t>(1, (pts.size() + 3) / 4);
  double m = 0.0, se2 = 0.0;
  for (std::size_t i = pts.size() - k; i < pts.size(); ++i) {
    m += pts[i].value;
    se2 += pts[i].standard_error * pts[i].standard_error;
  }
  return {m / k, std::sqrt(se2) / k};
}

inline ScenarioPoint summarise(double t, const std::vector<double>& values) {
  ScenarioPoint p;
  p.t = t;
  p.value = stats::mean(values);
  p.standard_error = values.size() >= 2 ? stats::standard_error(values) : 0.0;
  return p;
}

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0) throw NumericalError("adaptive Simpson did not converge", left + right, std::abs(diff));
  if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a,b] to absolute tolerance `tol`.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-8) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return detail::simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

/// int_0^1 (g(s) - f(s))^{-2} ds.
inline double inverse_square_width_integral(const Corridor::Boundary& f, const Corridor::Boundary& g) {
  return adaptive_simpson(
      [&](double s) {
        const double w = g(s) - f(s);
        require(w > 0.0, "functional corridor requires f(s) < g(s) on [0,1]");
        return 1.0 / (w * w);
      },
      0.0, 1.0, 1e-8);
}

struct SmallDeviationConfig {
  double alpha = 0.25;
  double lower = 0.0;
  double upper = 1.0;
  double beta = 0.0;
  std::vector<double> t_grid;
  /// Env grid spacing relative to the squared band width at each t.
  double relative_dt = 1e-3;
  ScenarioOptions run{};
};

/// Ensemble mean of -ln p_t / t^{1-2 alpha} for the band [a t^alpha, b t^alpha]
/// started at its midpoint. The observed rate is the last-quarter average;
/// predicted_rate = gamma / (b-a)^2.
inline ScenarioResult small_deviation_run(const SmallDeviationConfig& cfg, double gamma) {
  require(cfg.alpha > 0.0 && cfg.alpha < 0.5, "alpha must lie in (0,1/2) for the small-deviation scaling");
  require(cfg.lower < cfg.upper, "small-deviation band requires a < b");
  require(!cfg.t_grid.empty(), "small-deviation run needs a time grid");
  for (std::size_t i = 0; i < cfg.t_grid.size(); ++i)
    require(cfg.t_grid[i] > 0.0 && (i == 0 || cfg.t_grid[i] > cfg.t_grid[i - 1]), "t grid must be increasing and positive");
  require(cfg.run.ensemble_size >= 1, "ensemble size must be positive");
  require(cfg.relative_dt > 0.0, "relative dt must be positive");

  const double mid = 0.5 * (cfg.lower + cfg.upper);
  const Corridor corridor =
      Corridor::scaled(cfg.alpha, cfg.lower, cfg.upper, {mid, mid}, {cfg.lower, cfg.upper}, cfg.beta);
  const int replicas = cfg.beta == 0.0 ? 1 : cfg.run.ensemble_size;
  std::vector<SeedLabel> labels;
  for (int r = 0; r < replicas; ++r) labels.push_back({cfg.beta, static_cast<std::uint64_t>(r)});
  const auto seeds = seed_schedule(cfg.run.master_seed, labels);

  ScenarioResult res;
  res.scenario_id = "small-dev";
  res.parameters = {{"alpha", cfg.alpha}, {"band", {cfg.lower, cfg.upper}}, {"beta", cfg.beta},
                    {"t_grid", cfg.t_grid}, {"relative_dt", cfg.relative_dt},
                    {"ensemble_size", replicas}, {"master_seed", cfg.run.master_seed}};
  for (double t : cfg.t_grid) {
    const double scale = std::pow(t, cfg.alpha);
    const double width = (cfg.upper - cfg.lower) * scale;
    const double dt = std::min(t, cfg.relative_dt * width * width);
    const double norm = std::pow(t, 1.0 - 2.0 * cfg.alpha);
    auto one = [&](std::size_t r) {
      const auto env = sample_environment(seeds[r], t, dt, cfg.beta);
      const auto c = quenched_survival(env, corridor, mid * scale, t, cfg.run.quenched);
      return c.value_at(t) / norm;
    };
    res.diagnostics.push_back(detail::summarise(t, parallel_map(seeds.size(), cfg.run.workers, one)));
  }
  const auto [obs, se] = detail::last_quarter(res.diagnostics);
  res.observed_rate = obs;
  res.observed_standard_error = se;
  res.predicted_rate = gamma / ((cfg.upper - cfg.lower) * (cfg.upper - cfg.lower));
  res.finalise();
  return res;
}

struct FunctionalConfig {
  Corridor::Boundary lower;
  Corridor::Boundary upper;
  std::string label = "f,g";
  Window start{};
  Window terminal{};
  double beta = 0.0;
  std::vector<double> horizons;
  double env_dt = 1e-3;
  ScenarioOptions run{};
};

/// Ensemble mean of -ln p_t / t for the corridor [f(s/t), g(s/t)] started at
/// the start-window midpoint. predicted_rate = gamma * int (g-f)^{-2}.
inline ScenarioResult functional_corridor_run(const FunctionalConfig& cfg, double gamma) {
  require(!cfg.horizons.empty(), "functional run needs horizons");
  for (std::size_t i = 0; i < cfg.horizons.size(); ++i)
    require(cfg.horizons[i] > 0.0 && (i == 0 || cfg.horizons[i] > cfg.horizons[i - 1]),
            "horizons must be increasing and positive");
  const Corridor corridor = Corridor::functional(cfg.lower, cfg.upper, cfg.start, cfg.terminal, cfg.beta, cfg.label);
  const double integral = inverse_square_width_integral(cfg.lower, cfg.upper);
  const int replicas = cfg.beta == 0.0 ? 1 : cfg.run.ensemble_size;
  std::vector<SeedLabel> labels;
  for (int r = 0; r < replicas; ++r) labels.push_back({cfg.beta, static_cast<std::uint64_t>(r)});
  const auto seeds = seed_schedule(cfg.run.master_seed, labels);
  const double x0 = 0.5 * (cfg.start.lo + cfg.start.hi);

  ScenarioResult res;
  res.scenario_id = "functional";
  res.parameters = {{"corridor", corridor.describe()}, {"beta", cfg.beta}, {"horizons", cfg.horizons},
                    {"env_dt", cfg.env_dt}, {"ensemble_size", replicas}, {"master_seed", cfg.run.master_seed},
                    {"width_integral", integral}};
  for (double t : cfg.horizons) {
    auto one = [&](std::size_t r) {
      const auto env = sample_environment(seeds[r], t, std::min(cfg.env_dt, t), cfg.beta);
      return quenched_survival(env, corridor, x0, t, cfg.run.quenched).value_at(t) / t;
    };
    res.diagnostics.push_back(detail::summarise(t, parallel_map(seeds.size(), cfg.run.workers, one)));
  }
  const auto [obs, se] = detail::last_quarter(res.diagnostics);
  res.observed_rate = obs;
  res.observed_standard_error = se;
  res.predicted_rate = gamma * integral;
  res.finalise();
  return res;
}

struct AnnealedReport {
  double beta = 0.0;
  double t = 0.0;
  double analytic = 0.0;          // band survival at time (1+beta^2) t
  double mean_ratio = 0.0;        // ensemble mean of p_t / analytic
  double ratio_standard_error = 0.0;
  double relative_error = 0.0;    // |mean_ratio - 1|
  double z_score = 0.0;
  double mean_q = 0.0;            // ensemble mean of -ln p_t
  double log_mean_p = 0.0;        // -ln of the ensemble mean of p_t
  double jensen_gap = 0.0;        // mean_q - log_mean_p
  std::size_t ensemble_size = 0;

  bool within(double n_se) const {
    return std::abs(mean_ratio - 1.0) <= n_se * ratio_standard_error + 1e-12;
  }
};

/// Compares the ensemble mean of quenched survival in the band (started at its
/// midpoint) with the fixed-band survival of a Brownian motion of variance 1+beta^2.
inline AnnealedReport annealed_comparison(double lower, double upper, double beta, double t, double env_dt,
                                          const ScenarioOptions& run) {
  require(lower < upper, "annealed comparison requires a < b");
  require(run.ensemble_size >= 2, "annealed comparison needs at least two environments");
  const Corridor corridor = Corridor::band(lower, upper, beta);
  const double x0 = 0.5 * (lower + upper);
  AnnealedReport rep;
  rep.beta = beta;
  rep.t = t;
  rep.ensemble_size = static_cast<std::size_t>(run.ensemble_size);
  const BandSpec band(lower, upper);
  rep.analytic = band_survival_fixed(x0, band, (1.0 + beta * beta) * t);
  const double log_analytic = log_band_survival_fixed(x0, band, (1.0 + beta * beta) * t);
  std::vector<SeedLabel> labels;
  for (int r = 0; r < run.ensemble_size; ++r) labels.push_back({beta, static_cast<std::uint64_t>(r)});
  const auto seeds = seed_schedule(run.master_seed, labels);
  const auto qs = parallel_map(seeds.size(), run.workers, [&](std::size_t r) {
    const auto env = sample_environment(seeds[r], t, std::min(env_dt, t), beta);
    return quenched_survival(env, corridor, x0, t, run.quenched).value_at(t);
  });
  std::vector<double> ratios;
  for (double q : qs) ratios.push_back(std::exp(-q - log_analytic));
  rep.mean_ratio = stats::mean(ratios);
  rep.ratio_standard_error = stats::standard_error(ratios);
  rep.relative_error = std::abs(rep.mean_ratio - 1.0);
  rep.z_score = rep.ratio_standard_error > 0.0 ? (rep.mean_ratio - 1.0) / rep.ratio_standard_error : 0.0;
  rep.mean_q = stats::mean(qs);
  rep.log_mean_p = -(std::log(rep.mean_ratio) + log_analytic);
  rep.jensen_gap = rep.mean_q - rep.log_mean_p;
  return rep;
}

struct TailConfig {
  double t = 2.0;
  Corridor corridor = Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 1.0);
  double q_exponent = 1.5;
  std::vector<double> n_values{1e2, 1e3, 1e4};
  std::vector<double> p_values{1.0, 2.0};
  int start_points = 17;
  double env_dt = 1e-3;
  ScenarioOptions run{};
};

struct TailReport {
  std::vector<double> moments;              // E X^j, j = 1..4
  std::vector<double> moment_errors;        // standard errors
  std::vector<double> half_moments;         // same on the first half of the ensemble
  std::vector<double> thresholds;           // (ln n)^q
  std::vector<double> exceedance;           // fraction of X >= threshold
  std::vector<std::vector<double>> products;  // products[p][n] = n^p * exceedance
  bool moments_finite = false;
  bool moments_stable = false;  // |full - half| < 3 SE(half) for every order
  bool products_decreasing = false;
  std::vector<double> samples;

  bool passed() const { return moments_finite && moments_stable && products_decreasing; }
};

/// Samples X-bar_t over the ensemble and reports moments, their stability
/// under halving, and the n^p weighted exceedances of (ln n)^q.
inline TailReport tail_diagnostic(const TailConfig& cfg) {
  require(cfg.q_exponent > 1.0, "tail exponent q must exceed 1");
  require(cfg.run.ensemble_size >= 1000, "tail diagnostic needs an ensemble of at least 1000");
  const double beta = cfg.corridor.beta();
  const int replicas = beta == 0.0 ? 1 : cfg.run.ensemble_size;
  std::vector<SeedLabel> labels;
  for (int r = 0; r < replicas; ++r) labels.push_back({beta, static_cast<std::uint64_t>(r)});
  const auto seeds = seed_schedule(cfg.run.master_seed, labels);
  TailReport rep;
  rep.samples = parallel_map(seeds.size(), cfg.run.workers, [&](std::size_t r) {
    const auto env = sample_environment(seeds[r], cfg.t, std::min(cfg.env_dt, cfg.t), beta);
    return x_bar(env, cfg.corridor, cfg.t, cfg.start_points, cfg.run.quenched).value_at(cfg.t);
  });
  if (replicas == 1) rep.samples.assign(static_cast<std::size_t>(cfg.run.ensemble_size), rep.samples.front());

  const std::size_t N = rep.samples.size();
  const std::size_t half = N / 2;
  rep.moments_finite = true;
  rep.moments_stable = true;
  for (int j = 1; j <= 4; ++j) {
    std::vector<double> pw(N);
    for (std::size_t i = 0; i < N; ++i) pw[i] = std::pow(rep.samples[i], j);
    const std::vector<double> first(pw.begin(), pw.begin() + static_cast<std::ptrdiff_t>(half));
    const double m = stats::mean(pw);
    const double se = stats::standard_error(pw);
    const double mh = stats::mean(first);
    const double seh = stats::standard_error(first);
    rep.moments.push_back(m);
    rep.moment_errors.push_back(se);
    rep.half_moments.push_back(mh);
    if (!std::isfinite(m) || !std::isfinite(se)) rep.moments_finite = false;
    if (!(std::abs(m - mh) <= 3.0 * seh + 1e-12 * std::abs(m))) rep.moments_stable = false;
  }
  for (double n : cfg.n_values) {
    const double thr = std::pow(std::log(n), cfg.q_exponent);
    rep.thresholds.push_back(thr);
    const auto hits = std::count_if(rep.samples.begin(), rep.samples.end(), [&](double x) { return x >= thr; });
    rep.exceedance.push_back(static_cast<double>(hits) / static_cast<double>(N));
  }
  rep.products_decreasing = true;
  for (double p : cfg.p_values) {
    std::vector<double> row;
    for (std::size_t k = 0; k < cfg.n_values.size(); ++k) row.push_back(std::pow(cfg.n_values[k], p) * rep.exceedance[k]);
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k] > row[k - 1]) rep.products_decreasing = false;
    rep.products.push_back(row);
  }
  return rep;
}

inline nlohmann::json to_json(const ScenarioResult& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.diagnostics) pts.push_back({{"t", p.t}, {"value", p.value}, {"stderr", p.standard_error}});
  return {{"scenario", r.scenario_id},        {"parameters", r.parameters},
          {"observed_rate", r.observed_rate}, {"observed_stderr", r.observed_standard_error},
          {"predicted_rate", r.predicted_rate}, {"relative_error", r.relative_error},
          {"diagnostics", pts}};
}

inline nlohmann::json to_json(const AnnealedReport& r) {
  return {{"scenario", "annealed"},  {"beta", r.beta},
          {"t", r.t},                {"analytic", r.analytic},
          {"mean_ratio", r.mean_ratio}, {"ratio_stderr", r.ratio_standard_error},
          {"relative_error", r.relative_error}, {"z_score", r.z_score},
          {"mean_q", r.mean_q},      {"log_mean_p", r.log_mean_p},
          {"jensen_gap", r.jensen_gap}, {"ensemble_size", r.ensemble_size}};
}

inline nlohmann::json to_json(const TailReport& r) {
  return {{"scenario", "tail"},          {"moments", r.moments},
          {"moment_stderr", r.moment_errors}, {"half_ensemble_moments", r.half_moments},
          {"thresholds", r.thresholds},  {"exceedance", r.exceedance},
          {"products", r.products},      {"moments_finite", r.moments_finite},
          {"moments_stable", r.moments_stable}, {"products_decreasing", r.products_decreasing},
          {"passed", r.passed()}};
}

// Same record layout as the gamma curve files: one line per diagnostic time.
inline void write_scenario(std::ostream& os, const ScenarioResult& r) {
  os << "# qcorr-scenario " << r.scenario_id << " observed=" << exact(r.observed_rate)
     << " predicted=" << exact(r.predicted_rate) << " relative_error=" << exact(r.relative_error) << "\n";
  os << "# t value stderr\n";
  for (const auto& p : r.diagnostics)
    os << exact(p.t) << ' ' << exact(p.value) << ' ' << exact(p.standard_error) << '\n';
}

}  // namespace qcorr
