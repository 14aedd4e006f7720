#pragma once

// Decay-rate estimation from ensembles of survival curves, the beta sweep,
// property checks on the resulting gamma curve, the width-scaling check and
// the subadditivity audit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qcorr/corridor.hpp"
#include "qcorr/env.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/format.hpp"
#include "qcorr/parallel.hpp"
#include "qcorr/quenched.hpp"
#include "qcorr/seeds.hpp"
#include "qcorr/stats.hpp"

namespace qcorr {

inline constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct RateEstimate {
  double gamma_over_L2 = 0.0;  // slope of q_t against t
  double gamma = 0.0;          // slope * width^2
  double ci_low = 0.0;         // 95% interval on gamma
  double ci_high = 0.0;
  FitWindow fit_window;
  std::size_t n_environments = 0;
  double r_squared = 0.0;  // smallest per-environment value
  double width = 1.0;
  double increment_rate = 0.0;  // mean of (q_{2t} - q_t)/t at t = t_max/2, slope units
  bool ci_defined = false;
  bool low_quality = false;  // some environment fit has r^2 < 0.99
  std::vector<double> slopes;

  double half_width() const { return 0.5 * (ci_high - ci_low); }
};

/// Least-squares slope per curve over the fit window, aggregated with a Student-t interval.
inline RateEstimate extract_rate(const std::vector<SurvivalCurve>& curves, FitWindow window, double width = 1.0) {
  require(!curves.empty(), "rate extraction needs at least one curve");
  require(window.lo >= 1.0, "fit window must start at t >= 1 to exclude the burn-in");
  require(window.hi > window.lo, "fit window must have positive length");
  require(width > 0.0, "band width must be positive");
  RateEstimate r;
  r.fit_window = window;
  r.width = width;
  r.n_environments = curves.size();
  r.r_squared = 1.0;
  std::vector<double> increments;
  for (const auto& c : curves) {
    require(!c.empty() && c.time_grid.front() <= window.lo + 1e-9 && c.final_time() >= window.hi - 1e-9,
            "fit window must lie within every curve's grid");
    std::vector<double> t, q;
    for (std::size_t i = 0; i < c.time_grid.size(); ++i) {
      if (c.time_grid[i] < window.lo - 1e-9 || c.time_grid[i] > window.hi + 1e-9) continue;
      require(std::isfinite(c.log_survival[i]), "survival curve is infinite inside the fit window");
      t.push_back(c.time_grid[i]);
      q.push_back(c.log_survival[i]);
    }
    require(t.size() >= 2, "fit window must contain at least two curve points");
    const auto fit = stats::fit_line(t, q);
    r.slopes.push_back(fit.slope);
    r.r_squared = std::min(r.r_squared, fit.r_squared);
    const double half = 0.5 * window.hi;
    increments.push_back((c.value_at(window.hi) - c.value_at(half)) / half);
  }
  const auto ci = stats::t_interval(r.slopes);
  const double w2 = width * width;
  r.gamma_over_L2 = ci.centre;
  r.gamma = ci.centre * w2;
  r.ci_low = ci.low * w2;
  r.ci_high = ci.high * w2;
  r.ci_defined = ci.defined;
  r.low_quality = r.r_squared < 0.99;
  r.increment_rate = stats::mean(increments);
  return r;
}

struct GammaCurve {
  std::vector<double> betas;
  std::vector<RateEstimate> estimates;
  std::string provenance;

  const RateEstimate* find(double beta) const {
    for (std::size_t i = 0; i < betas.size(); ++i)
      if (betas[i] == beta) return &estimates[i];
    return nullptr;
  }
};

struct SweepConfig {
  std::vector<double> betas{0.0};
  int ensemble_size = 32;
  double horizon = 20.0;
  double env_dt = 1e-3;
  /// Band, start and terminal windows; beta is overwritten per sweep point.
  Corridor corridor = Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, 0.0);
  SurvivalVariant variant = SurvivalVariant::inf_start;
  int start_points = 17;
  QuenchedOptions quenched{};
  std::optional<FitWindow> fit_window;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  int min_ensemble = 8;

  FitWindow window() const { return fit_window.value_or(FitWindow{0.25 * horizon, horizon}); }

  void validate() const {
    require(!betas.empty(), "sweep needs at least one beta");
    for (std::size_t i = 0; i < betas.size(); ++i) {
      require(std::isfinite(betas[i]), "sweep betas must be finite");
      require(i == 0 || betas[i] > betas[i - 1], "sweep betas must be strictly increasing");
    }
    require(ensemble_size >= min_ensemble, "ensemble size must be at least " + std::to_string(min_ensemble));
    require(horizon > 0.0 && env_dt > 0.0 && env_dt <= horizon, "need 0 < env dt <= horizon");
    require(corridor.kind() != CorridorKind::scaled_band, "rate sweeps use unscaled corridors");
    const auto w = window();
    require(w.lo >= 1.0 && w.hi <= horizon + 1e-9 && w.lo < w.hi, "fit window must satisfy 1 <= t_min < t_max <= horizon");
  }
};

/// One curve for the given variant.
inline SurvivalCurve evaluate_curve(const EnvironmentPath& env, const Corridor& corridor, double horizon,
                                    SurvivalVariant variant, int start_points, const QuenchedOptions& opts) {
  switch (variant) {
    case SurvivalVariant::inf_start: return x_bar(env, corridor, horizon, start_points, opts);
    case SurvivalVariant::sup_start: return x_under(env, corridor, horizon, start_points, opts);
    case SurvivalVariant::pointwise: break;
  }
  return quenched_survival(env, corridor, corridor.start_window(horizon).lo, horizon, opts);
}

struct EnsembleResult {
  std::vector<std::uint64_t> seeds;
  std::vector<SurvivalCurve> curves;
};

/// Curves for replicas 0..ensemble_size-1 of one beta. At beta = 0 the
/// environment does not enter, so a single curve is computed and relabelled.
inline EnsembleResult run_ensemble(const SweepConfig& cfg, double beta) {
  EnsembleResult res;
  std::vector<SeedLabel> labels;
  for (int r = 0; r < cfg.ensemble_size; ++r) labels.push_back({beta, static_cast<std::uint64_t>(r)});
  res.seeds = seed_schedule(cfg.master_seed, labels);
  const Corridor corridor = cfg.corridor.with_beta(beta);
  auto one = [&](std::size_t i) {
    const auto env = sample_environment(res.seeds[i], cfg.horizon, cfg.env_dt, beta);
    return evaluate_curve(env, corridor, cfg.horizon, cfg.variant, cfg.start_points, cfg.quenched);
  };
  if (beta == 0.0) {
    const SurvivalCurve base = one(0);
    for (std::size_t i = 0; i < res.seeds.size(); ++i) {
      res.curves.push_back(base);
      res.curves.back().environment_seed = res.seeds[i];
    }
    return res;
  }
  res.curves = parallel_map(res.seeds.size(), cfg.workers, one);
  return res;
}

struct SweepResult {
  GammaCurve curve;
  std::vector<EnsembleResult> ensembles;  // one per beta
};

inline std::string describe(const SweepConfig& cfg) {
  const auto w = cfg.window();
  return "corridor=" + cfg.corridor.describe() + " variant=" + to_string(cfg.variant) +
         " ensemble=" + std::to_string(cfg.ensemble_size) + " horizon=" + exact(cfg.horizon) +
         " env_dt=" + exact(cfg.env_dt) + " spatial_points=" + std::to_string(cfg.quenched.spatial_points) +
         " start_points=" + std::to_string(cfg.start_points) + " fit=[" + exact(w.lo) + "," + exact(w.hi) +
         "] master_seed=" + std::to_string(cfg.master_seed);
}

inline SweepResult gamma_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult out;
  out.curve.provenance = describe(cfg);
  const double width = cfg.corridor.width(0.0, cfg.horizon);
  for (double beta : cfg.betas) {
    out.ensembles.push_back(run_ensemble(cfg, beta));
    out.curve.betas.push_back(beta);
    out.curve.estimates.push_back(extract_rate(out.ensembles.back().curves, cfg.window(), width));
  }
  return out;
}

enum class CheckStatus { pass, fail, skipped, consistent, inconsistent };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skipped: return "SKIPPED";
    case CheckStatus::consistent: return "CONSISTENT";
    case CheckStatus::inconsistent: return "INCONSISTENT";
  }
  return "?";
}

struct PropertyCheck {
  std::string name;
  CheckStatus status = CheckStatus::skipped;
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;

  /// True unless some check failed; "inconsistent" is informational.
  bool passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::fail; });
  }
  const PropertyCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Relative slack for check (i) when the beta = 0 interval is degenerate.
inline constexpr double kGammaZeroTolerance = 5e-3;
/// Relative numerical slack on the lower bound.
inline constexpr double kLowerBoundTolerance = 1e-6;

inline PropertyReport property_report(const GammaCurve& curve) {
  PropertyReport rep;
  auto hw = [](const RateEstimate& e) { return e.half_width(); };

  {
    PropertyCheck c{"gamma0_classical", CheckStatus::skipped, "beta=0 not in sweep"};
    if (const auto* e = curve.find(0.0)) {
      const double target = 0.5 * kPi2;
      const double slack = kGammaZeroTolerance * target;
      const bool ok = e->ci_low - slack <= target && target <= e->ci_high + slack;
      c.status = ok ? CheckStatus::pass : CheckStatus::fail;
      c.detail = "gamma(0)=" + exact(e->gamma) + " ci=[" + exact(e->ci_low) + "," + exact(e->ci_high) +
                 "] target=" + exact(target);
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"annealed_lower_bound", CheckStatus::skipped, "no beta != 0 in sweep"};
    for (std::size_t i = 0; i < curve.betas.size(); ++i) {
      const double b = curve.betas[i];
      if (b == 0.0) continue;
      if (c.status == CheckStatus::skipped) {
        c.status = CheckStatus::pass;
        c.detail.clear();
      }
      const double bound = 0.5 * kPi2 * (1.0 + b * b);
      const auto& e = curve.estimates[i];
      if (e.ci_high < bound * (1.0 - kLowerBoundTolerance)) c.status = CheckStatus::fail;
      c.detail += "beta=" + exact(b) + " ci_high=" + exact(e.ci_high) + " bound=" + exact(bound) + "; ";
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"gamma1_upper_bound", CheckStatus::skipped, "beta=1 not in sweep"};
    if (const auto* e = curve.find(1.0)) {
      c.status = e->ci_low <= 4.0 * kPi2 ? CheckStatus::pass : CheckStatus::fail;
      c.detail = "gamma(1)=" + exact(e->gamma) + " ci_low=" + exact(e->ci_low) + " bound=" + exact(4.0 * kPi2);
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"convexity", CheckStatus::skipped, "fewer than three betas"};
    if (curve.betas.size() >= 3) {
      c.status = CheckStatus::pass;
      c.detail.clear();
      for (std::size_t i = 0; i + 2 < curve.betas.size(); ++i) {
        const double b1 = curve.betas[i], bm = curve.betas[i + 1], b2 = curve.betas[i + 2];
        const double lam = (b2 - bm) / (b2 - b1);
        const auto &e1 = curve.estimates[i], &em = curve.estimates[i + 1], &e2 = curve.estimates[i + 2];
        const double chord = lam * e1.gamma + (1.0 - lam) * e2.gamma;
        const double slack = std::sqrt(hw(em) * hw(em) + lam * lam * hw(e1) * hw(e1) +
                                       (1.0 - lam) * (1.0 - lam) * hw(e2) * hw(e2));
        const double excess = em.gamma - chord;
        if (excess > slack) c.status = CheckStatus::fail;
        c.detail += "beta=" + exact(bm) + " excess=" + exact(excess) + " slack=" + exact(slack) + "; ";
      }
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"monotone_nonnegative", CheckStatus::skipped, "fewer than two betas >= 0"};
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < curve.betas.size(); ++i)
      if (curve.betas[i] >= 0.0) pts.emplace_back(curve.betas[i], curve.estimates[i].gamma);
    if (pts.size() >= 2) {
      c.status = CheckStatus::consistent;
      c.detail.clear();
      for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!(pts[i].second > pts[i - 1].second)) c.status = CheckStatus::inconsistent;
        c.detail += exact(pts[i].second - pts[i - 1].second) + " ";
      }
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"evenness", CheckStatus::skipped, "no +/- beta pairs"};
    for (std::size_t i = 0; i < curve.betas.size(); ++i) {
      if (curve.betas[i] <= 0.0) continue;
      const auto* neg = curve.find(-curve.betas[i]);
      if (!neg) continue;
      if (c.status == CheckStatus::skipped) {
        c.status = CheckStatus::pass;
        c.detail.clear();
      }
      const auto& pos = curve.estimates[i];
      const double diff = pos.gamma - neg->gamma;
      if (std::abs(diff) > std::hypot(pos.half_width(), neg->half_width())) c.status = CheckStatus::fail;
      c.detail += "beta=" + exact(curve.betas[i]) + " diff=" + exact(diff) + "; ";
    }
    rep.checks.push_back(c);
  }
  return rep;
}

struct WidthScalingReport {
  std::vector<double> widths;
  std::vector<RateEstimate> estimates;  // gamma = slope * width^2
  double max_relative_spread = 0.0;
  bool consistent = false;  // pairwise agreement within combined intervals
};

/// Rates for several band widths with the same replica seeds. The horizon and
/// fit window scale with width^2; the env grid spacing stays fixed.
inline WidthScalingReport width_scaling_check(const std::vector<double>& widths, double beta, SweepConfig base) {
  require(widths.size() >= 2, "width scaling needs at least two widths");
  WidthScalingReport rep;
  rep.widths = widths;
  const Window sw = base.corridor.start_window(base.horizon);
  const Window tw = base.corridor.terminal_window(base.horizon);
  const double a = base.corridor.a(), b = base.corridor.b();
  const FitWindow w0 = base.window();
  const double h0 = base.horizon;
  for (double L : widths) {
    require(L > 0.0, "band widths must be positive");
    const double s = L / (b - a);
    const double mid = 0.5 * (a + b);
    auto scale = [&](double x) { return mid + s * (x - mid); };
    SweepConfig cfg = base;
    cfg.corridor = Corridor::constant(scale(a), scale(b), {scale(sw.lo), scale(sw.hi)}, {scale(tw.lo), scale(tw.hi)}, beta);
    cfg.horizon = h0 * s * s;
    cfg.fit_window = FitWindow{std::max(1.0, w0.lo * s * s), w0.hi * s * s};
    cfg.betas = {beta};
    const auto ens = run_ensemble(cfg, beta);
    rep.estimates.push_back(extract_rate(ens.curves, cfg.window(), L));
  }
  rep.consistent = true;
  double lo = rep.estimates.front().gamma, hi = lo;
  for (std::size_t i = 0; i < rep.estimates.size(); ++i) {
    lo = std::min(lo, rep.estimates[i].gamma);
    hi = std::max(hi, rep.estimates[i].gamma);
    for (std::size_t j = i + 1; j < rep.estimates.size(); ++j) {
      const auto &ei = rep.estimates[i], &ej = rep.estimates[j];
      if (std::abs(ei.gamma - ej.gamma) > std::hypot(ei.half_width(), ej.half_width()) + 1e-12 * std::abs(ei.gamma))
        rep.consistent = false;
    }
  }
  rep.max_relative_spread = (hi - lo) / lo;
  return rep;
}

struct AuditReport {
  std::vector<double> checkpoints;  // leading 0 followed by the requested times
  /// q[i][j] = q_{checkpoints[i], checkpoints[j]} for i < j, NaN otherwise.
  std::vector<std::vector<double>> q;
  double max_violation = -kInf;
  std::pair<double, double> worst_pair{0.0, 0.0};
  std::size_t pairs = 0;
  std::size_t violations = 0;  // pairs with violation above the tolerance

  static constexpr double kTolerance = 1e-6;
  bool passed() const { return violations == 0; }
};

/// Audits q_{0,n} <= q_{0,m} + q_{m,n} for all checkpoint pairs 0 < m < n.
/// q_{m,n} starts at time m from every grid node inside the window and the
/// window's two endpoints, and must end in the same window at time n.
inline AuditReport subadditivity_audit(const EnvironmentPath& env, const Corridor& corridor,
                                       const std::vector<double>& checkpoints, const QuenchedOptions& opts = {}) {
  require(corridor.kind() == CorridorKind::constant_band, "subadditivity audit needs a constant corridor");
  require(corridor.start_window() == corridor.terminal_window(0.0),
          "subadditivity audit needs the inf_start variant with terminal window equal to the start window");
  require(!checkpoints.empty(), "subadditivity audit needs checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i)
    require(checkpoints[i] > 0.0 && (i == 0 || checkpoints[i] > checkpoints[i - 1]),
            "checkpoints must be positive and strictly increasing");
  require(opts.spatial_points >= 32, "transfer operator needs at least 32 spatial points");

  const double horizon = checkpoints.back();
  const auto pieces = detail::build_schedule(env, corridor, horizon, 0.0);
  const double dt = env.dt();
  const double beta = env.beta();
  const int n = opts.spatial_points;
  const double width = corridor.width(0.0, horizon);
  const double mid = corridor.mid(0.0, horizon);
  const double h = width / n;
  const auto nodes = detail::midpoint_nodes(width, n);
  const BandSpec band(-0.5 * width, 0.5 * width);
  const Window win = corridor.start_window();
  const auto win_nodes = detail::window_nodes(nodes, win.lo - mid, win.hi - mid);
  const std::vector<double> ends{win.lo - mid, win.hi - mid};

  AuditReport rep;
  rep.checkpoints.push_back(0.0);
  rep.checkpoints.insert(rep.checkpoints.end(), checkpoints.begin(), checkpoints.end());
  const std::size_t C = rep.checkpoints.size();
  rep.q.assign(C, std::vector<double>(C, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::size_t> step_of(C);
  for (std::size_t i = 0; i < C; ++i) step_of[i] = i == 0 ? 0 : grid_steps(rep.checkpoints[i], dt);

  const Eigen::MatrixXd kernel = detail::kernel_matrix(nodes, width, dt, beta, opts.step_model, opts.series);
  Eigen::VectorXd r(n);
  for (int j = 0; j < n; ++j) r(j) = nodes[static_cast<std::size_t>(j)];

  for (std::size_t jn = 1; jn < C; ++jn) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (auto j : win_nodes) v(j) = 1.0;
    double logscale = 0.0;
    std::size_t next_m = jn;  // checkpoints are visited from jn-1 down to 0
    for (std::size_t k = step_of[jn]; k-- > 0;) {
      const double c = pieces[k].slope;
      const double tau = pieces[k].duration;
      const double damp = -0.5 * c * c * tau;
      const bool at_checkpoint = next_m > 0 && k == step_of[next_m - 1];
      const double base = logscale;
      auto entry = [&](double x, double y) {
        const double d = detail::step_density(x, y, band, tau, beta, opts.step_model, opts.series);
        return d > 0.0 ? std::exp(std::log(d) + c * (x - y) + damp) * h : 0.0;
      };
      double q_ends = -kInf;
      if (at_checkpoint) {
        for (double x : ends) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += entry(x, r(j)) * v(j);
          q_ends = std::max(q_ends, s > 0.0 ? -(base + std::log(s)) : kInf);
        }
      }
      double node_log = base;
      if (std::abs(c) * 0.5 * width <= detail::kMaxTiltExponent) {
        const Eigen::ArrayXd ex = (c * r.array()).exp();
        v = (ex * (kernel * (v.array() / ex).matrix()).array()).matrix();
        node_log += damp;
      } else {
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) m(i, j) = entry(r(i), r(j));
        v = m * v;
      }
      if (at_checkpoint) {
        double node_min = kInf;
        for (auto j : win_nodes) node_min = std::min(node_min, v(j));
        const double q_nodes = node_min > 0.0 ? -(node_log + std::log(node_min)) : kInf;
        rep.q[next_m - 1][jn] = std::max(q_nodes, q_ends);
        --next_m;
      }
      const double top = v.maxCoeff();
      if (!(top > 0.0)) {
        for (std::size_t m = 0; m < next_m; ++m) rep.q[m][jn] = kInf;
        break;
      }
      logscale = node_log + std::log(top);
      v /= top;
    }
  }

  for (std::size_t jm = 1; jm < C; ++jm)
    for (std::size_t jn = jm + 1; jn < C; ++jn) {
      const double viol = rep.q[0][jn] - rep.q[0][jm] - rep.q[jm][jn];
      ++rep.pairs;
      if (viol > rep.max_violation) {
        rep.max_violation = viol;
        rep.worst_pair = {rep.checkpoints[jm], rep.checkpoints[jn]};
      }
      if (viol > AuditReport::kTolerance) ++rep.violations;
    }
  return rep;
}

// One record per beta: "beta gamma ci_low ci_high r_squared n_env".
inline void write_gamma_curve(std::ostream& os, const GammaCurve& curve) {
  os << "# qcorr-gamma " << curve.provenance << "\n";
  os << "# beta gamma ci_low ci_high r_squared n_env\n";
  for (std::size_t i = 0; i < curve.betas.size(); ++i) {
    const auto& e = curve.estimates[i];
    os << exact(curve.betas[i]) << ' ' << exact(e.gamma) << ' ' << exact(e.ci_low) << ' ' << exact(e.ci_high) << ' '
       << exact(e.r_squared) << ' ' << e.n_environments << '\n';
  }
}

inline nlohmann::json to_json(const RateEstimate& e) {
  return {{"gamma", e.gamma},
          {"gamma_over_L2", e.gamma_over_L2},
          {"ci_low", e.ci_low},
          {"ci_high", e.ci_high},
          {"fit_window", {e.fit_window.lo, e.fit_window.hi}},
          {"n_environments", e.n_environments},
          {"r_squared", e.r_squared},
          {"width", e.width},
          {"increment_rate", e.increment_rate},
          {"ci_defined", e.ci_defined},
          {"low_quality", e.low_quality}};
}

inline nlohmann::json to_json(const PropertyReport& rep) {
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& c : rep.checks)
    checks[c.name] = {{"status", to_string(c.status)},
                      {"passed", c.status != CheckStatus::fail},
                      {"detail", c.detail}};
  return {{"passed", rep.passed()}, {"checks", checks}};
}

inline nlohmann::json to_json(const GammaCurve& curve) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < curve.betas.size(); ++i) {
    auto e = to_json(curve.estimates[i]);
    e["beta"] = curve.betas[i];
    pts.push_back(e);
  }
  return {{"provenance", curve.provenance}, {"estimates", pts}};
}

inline nlohmann::json to_json(const AuditReport& rep) {
  return {{"checkpoints", rep.checkpoints},
          {"pairs", rep.pairs},
          {"violations", rep.violations},
          {"max_violation", rep.max_violation},
          {"worst_pair", {rep.worst_pair.first, rep.worst_pair.second}},
          {"tolerance", AuditReport::kTolerance},
          {"passed", rep.passed()}};
}

}  // namespace qcorr
