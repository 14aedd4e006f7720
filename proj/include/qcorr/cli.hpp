#pragma once

// Pipeline driver behind the qcorr command-line tool.
//
// Exit status: 0 success, 1 input error, 2 a property check failed.
// Every run writes a manifest.json recording the resolved configuration, the
// code version and every derived seed; all other files are pure functions of
// the configuration.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcorr/config.hpp"
#include "qcorr/experiments.hpp"
#include "qcorr/quenched.hpp"
#include "qcorr/rates.hpp"
#include "qcorr/seeds.hpp"
#include "qcorr/stats.hpp"
#include "qcorr/version.hpp"

namespace qcorr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitProperty = 2;

namespace detail {

namespace fs = std::filesystem;

inline void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ParameterError("cannot write " + p.string());
  os << text;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string beta_tag(double beta) { return "beta_" + exact(beta); }

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

class Manifest {
 public:
  Manifest(const RunConfig& cfg, std::string command) {
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["config"] = describe(cfg);
    doc_["seeds"] = nlohmann::json::array();
  }
  void seed(double beta, std::uint64_t replica, std::uint64_t seed) {
    doc_["seeds"].push_back({{"beta", beta}, {"replica", replica}, {"seed", seed}});
  }
  void write(const fs::path& dir, int status) {
    doc_["exit_status"] = status;
    doc_["timestamp"] = utc_timestamp();
    write_json(dir / "manifest.json", doc_);
  }

 private:
  nlohmann::json doc_;
};

inline void write_ensemble(const fs::path& dir, double beta, const EnsembleResult& ens) {
  for (std::size_t r = 0; r < ens.curves.size(); ++r) {
    std::ostringstream os;
    write_curve(os, ens.curves[r]);
    write_text(dir / "curves" / beta_tag(beta) / ("env_" + std::to_string(r) + ".dat"), os.str());
  }
}

inline int run_sweep(const RunConfig& cfg, const std::vector<double>& betas, bool with_oracle, std::ostream& log) {
  const fs::path out(cfg.output_dir);
  Manifest manifest(cfg, with_oracle ? "check" : "sweep");
  const SweepConfig sc = cfg.sweep(betas);
  const auto res = gamma_sweep(sc);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    write_ensemble(out, betas[i], res.ensembles[i]);
    for (std::size_t r = 0; r < res.ensembles[i].seeds.size(); ++r) manifest.seed(betas[i], r, res.ensembles[i].seeds[r]);
  }
  std::ostringstream gc;
  write_gamma_curve(gc, res.curve);
  write_text(out / "gamma_curve.txt", gc.str());
  const auto report = property_report(res.curve);
  nlohmann::json summary = {{"gamma_curve", to_json(res.curve)}, {"properties", to_json(report)}};
  bool ok = report.passed();

  if (with_oracle) {
    // Classical oracle: beta = 0 from the band midpoint with the whole band as terminal window.
    const double a = cfg.corridor.lower, b = cfg.corridor.upper, mid = 0.5 * (a + b);
    const auto env = sample_environment(label_seed(*cfg.master_seed, 0.0, 0), cfg.horizon, cfg.env_dt, 0.0);
    const auto curve = quenched_survival(env, Corridor::band(a, b, 0.0), mid, cfg.horizon, cfg.quenched());
    double worst = 0.0;
    for (std::size_t i = 0; i < curve.time_grid.size(); ++i)
      worst = std::max(worst, std::abs(curve.log_survival[i] +
                                       log_band_survival_fixed(mid, BandSpec(a, b), curve.time_grid[i], cfg.series)));
    const bool oracle_ok = worst <= 1e-6;
    summary["analytic_oracle"] = {{"max_abs_error", worst}, {"tolerance", 1e-6}, {"passed", oracle_ok}};
    ok = ok && oracle_ok;
  }
  summary["passed"] = ok;
  write_json(out / "summary.json", summary);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const auto& e = res.curve.estimates[i];
    log << "beta=" << exact(betas[i]) << " gamma=" << exact(e.gamma) << " ci=[" << exact(e.ci_low) << ", "
        << exact(e.ci_high) << "] r2=" << exact(e.r_squared) << "\n";
  }
  for (const auto& c : report.checks) log << c.name << ": " << to_string(c.status) << "\n";
  const int status = ok ? kExitOk : kExitProperty;
  manifest.write(out, status);
  return status;
}

inline int run_rate(const RunConfig& cfg, std::ostream& log) {
  std::vector<SurvivalCurve> curves;
  for (const auto& f : cfg.curve_files) {
    std::ifstream is(f);
    if (!is) throw ParameterError("cannot read curve file " + f);
    curves.push_back(read_curve(is));
  }
  const double T = curves.front().final_time();
  const FitWindow w = cfg.fit_window.value_or(FitWindow{0.25 * T, T});
  const auto est = extract_rate(curves, w, cfg.corridor.upper - cfg.corridor.lower);
  const fs::path out(cfg.output_dir);
  Manifest manifest(cfg, "rate");
  write_json(out / "rate.json", to_json(est));
  log << "gamma=" << exact(est.gamma) << " ci=[" << exact(est.ci_low) << ", " << exact(est.ci_high)
      << "] n_env=" << est.n_environments << (est.low_quality ? " (low r^2)" : "") << "\n";
  manifest.write(out, kExitOk);
  return kExitOk;
}

inline int run_audit(const RunConfig& cfg, std::ostream& log) {
  const fs::path out(cfg.output_dir);
  Manifest manifest(cfg, "audit");
  const double beta = cfg.audit_beta;
  const Corridor corridor = cfg.corridor.constant(beta);
  std::vector<SeedLabel> labels;
  for (int r = 0; r < cfg.audit_environments; ++r) labels.push_back({beta, static_cast<std::uint64_t>(r)});
  const auto seeds = seed_schedule(*cfg.master_seed, labels);
  const auto reports = parallel_map(seeds.size(), cfg.workers, [&](std::size_t r) {
    const auto env = sample_environment(seeds[r], cfg.checkpoints.back(), cfg.env_dt, beta);
    return subadditivity_audit(env, corridor, cfg.checkpoints, cfg.quenched());
  });
  nlohmann::json per_env = nlohmann::json::array();
  std::size_t violations = 0, pairs = 0;
  double worst = -kInf;
  std::vector<double> first_unit, later_unit;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    manifest.seed(beta, r, seeds[r]);
    auto j = to_json(reports[r]);
    j["seed"] = seeds[r];
    per_env.push_back(j);
    violations += reports[r].violations;
    pairs += reports[r].pairs;
    worst = std::max(worst, reports[r].max_violation);
    const auto& cp = reports[r].checkpoints;
    for (std::size_t i = 0; i + 1 < cp.size(); ++i)
      if (std::abs(cp[i + 1] - cp[i] - 1.0) < 1e-12) (i == 0 ? first_unit : later_unit).push_back(reports[r].q[i][i + 1]);
  }
  nlohmann::json summary = {{"environments", reports.size()}, {"pairs", pairs},
                            {"violations", violations},      {"max_violation", worst},
                            {"tolerance", AuditReport::kTolerance}, {"passed", violations == 0},
                            {"per_environment", per_env}};
  if (first_unit.size() >= 2 && later_unit.size() >= 2) {
    const double d = stats::ks_statistic(first_unit, later_unit);
    const double crit = stats::ks_critical_1pct(first_unit.size(), later_unit.size());
    summary["stationarity_ks"] = {{"statistic", d}, {"critical_1pct", crit}, {"consistent", d <= crit}};
  }
  write_json(out / "audit.json", summary);
  log << "audit: " << pairs << " pairs, " << violations << " violations above " << exact(AuditReport::kTolerance)
      << ", max violation " << exact(worst) << "\n";
  const int status = violations == 0 ? kExitOk : kExitProperty;
  manifest.write(out, status);
  return status;
}

inline double predicted_gamma(const RunConfig& cfg, double beta, std::ostream& log) {
  if (cfg.gamma) return *cfg.gamma;
  if (beta == 0.0) return 0.5 * kPi2;
  log << "no scenario.gamma given; estimating gamma(" << exact(beta) << ") with a sweep\n";
  const auto res = gamma_sweep(cfg.sweep({beta}));
  return res.curve.estimates.front().gamma;
}

inline int run_scenario(const RunConfig& cfg, std::ostream& log) {
  const fs::path out(cfg.output_dir);
  Manifest manifest(cfg, std::string("scenario ") + to_string(cfg.scenario));
  ScenarioOptions run;
  run.ensemble_size = cfg.ensemble_size;
  run.master_seed = *cfg.master_seed;
  run.quenched = cfg.quenched();
  run.workers = cfg.workers;
  const double beta = cfg.scenario_beta;
  const int replicas = beta == 0.0 ? 1 : cfg.ensemble_size;
  auto record_seeds = [&] {
    for (int r = 0; r < replicas; ++r)
      manifest.seed(beta, static_cast<std::uint64_t>(r), label_seed(*cfg.master_seed, beta, static_cast<std::uint64_t>(r)));
  };
  bool ok = true;
  nlohmann::json doc;
  switch (cfg.scenario) {
    case Scenario::small_dev: {
      SmallDeviationConfig sd;
      sd.alpha = cfg.alpha;
      sd.lower = cfg.corridor.lower;
      sd.upper = cfg.corridor.upper;
      sd.beta = beta;
      sd.t_grid = cfg.t_grid;
      sd.relative_dt = cfg.relative_dt;
      sd.run = run;
      const auto res = small_deviation_run(sd, predicted_gamma(cfg, beta, log));
      ok = res.relative_error <= cfg.tolerance;
      doc = to_json(res);
      std::ostringstream os;
      write_scenario(os, res);
      write_text(out / "scenario.txt", os.str());
      log << "small-dev: observed " << exact(res.observed_rate) << " predicted " << exact(res.predicted_rate)
          << " relative error " << exact(res.relative_error) << "\n";
      break;
    }
    case Scenario::functional: {
      FunctionalConfig fc;
      const Corridor c = cfg.corridor.functional(beta);
      const double f0 = cfg.corridor.lower, f1 = cfg.corridor.lower_slope;
      const double g0 = cfg.corridor.upper, g1 = cfg.corridor.upper_slope;
      fc.lower = [f0, f1](double s) { return f0 + f1 * s; };
      fc.upper = [g0, g1](double s) { return g0 + g1 * s; };
      fc.label = c.describe();
      fc.start = cfg.corridor.start;
      fc.terminal = cfg.corridor.terminal;
      fc.beta = beta;
      fc.horizons = cfg.t_grid;
      fc.env_dt = cfg.env_dt;
      fc.run = run;
      const auto res = functional_corridor_run(fc, predicted_gamma(cfg, beta, log));
      ok = res.relative_error <= cfg.tolerance;
      doc = to_json(res);
      std::ostringstream os;
      write_scenario(os, res);
      write_text(out / "scenario.txt", os.str());
      log << "functional: observed " << exact(res.observed_rate) << " predicted " << exact(res.predicted_rate)
          << " relative error " << exact(res.relative_error) << "\n";
      break;
    }
    case Scenario::annealed: {
      const auto rep = annealed_comparison(cfg.corridor.lower, cfg.corridor.upper, beta, cfg.annealed_t, cfg.env_dt, run);
      ok = rep.within(3.0) && (beta == 0.0 || rep.jensen_gap > 0.0);
      doc = to_json(rep);
      log << "annealed: mean/analytic " << exact(rep.mean_ratio) << " +- " << exact(rep.ratio_standard_error)
          << " jensen gap " << exact(rep.jensen_gap) << "\n";
      break;
    }
    case Scenario::tail: {
      TailConfig tc;
      tc.t = cfg.tail_t;
      tc.corridor = cfg.corridor.constant(beta);
      tc.q_exponent = cfg.tail_q;
      tc.start_points = cfg.start_points;
      tc.env_dt = cfg.env_dt;
      tc.run = run;
      const auto rep = tail_diagnostic(tc);
      ok = rep.passed();
      doc = to_json(rep);
      log << "tail: moments finite " << rep.moments_finite << " stable " << rep.moments_stable
          << " products decreasing " << rep.products_decreasing << "\n";
      break;
    }
  }
  record_seeds();
  doc["passed"] = ok;
  write_json(out / "scenario.json", doc);
  const int status = ok ? kExitOk : kExitProperty;
  manifest.write(out, status);
  return status;
}

}  // namespace detail

/// Runs the configured pipeline. Throws ParameterError on invalid input.
inline int run(const RunConfig& cfg, std::ostream& log = std::cout) {
  cfg.validate();
  switch (cfg.command) {
    case Command::sweep: return detail::run_sweep(cfg, cfg.betas, false, log);
    case Command::check: return detail::run_sweep(cfg, cfg.betas, true, log);
    case Command::rate: return detail::run_rate(cfg, log);
    case Command::audit: return detail::run_audit(cfg, log);
    case Command::scenario: return detail::run_scenario(cfg, log);
  }
  return kExitInput;
}

}  // namespace qcorr
