#pragma once

// Quenched survival probabilities for a fixed environment path.
//
// Within one environment grid step the corridor centre moves linearly between
// its grid values. In coordinates relative to that moving centre the particle
// is a Brownian motion with constant drift -slope killed on leaving
// (-L/2, L/2); the drift enters through the Cameron-Martin factor
// exp(slope (x - y) - slope^2 dt / 2). The remaining beta W fluctuation inside
// the step is either ignored (StepModel::linear) or averaged over its bridge
// law (StepModel::bridge). The transfer operator propagates a discretised
// sub-density on a midpoint grid of the band; the particle splitter samples
// the same per-step model with walkers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcorr/corridor.hpp"
#include "qcorr/env.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/format.hpp"
#include "qcorr/kernels.hpp"
#include "qcorr/random.hpp"

namespace qcorr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SurvivalVariant { pointwise, inf_start, sup_start };

inline const char* to_string(SurvivalVariant v) {
  switch (v) {
    case SurvivalVariant::pointwise: return "pointwise";
    case SurvivalVariant::inf_start: return "inf_start";
    case SurvivalVariant::sup_start: return "sup_start";
  }
  return "?";
}

struct SurvivalCurve {
  std::vector<double> time_grid;
  std::vector<double> log_survival;    // q_t = -ln p_t
  std::vector<double> standard_error;  // empty unless the curve is a Monte Carlo estimate
  SurvivalVariant variant = SurvivalVariant::pointwise;
  double start = std::numeric_limits<double>::quiet_NaN();
  std::string corridor_id;
  std::uint64_t environment_seed = 0;
  bool truncated = false;  // Monte Carlo population died before the horizon

  bool empty() const noexcept { return time_grid.empty(); }
  double final_time() const { return time_grid.back(); }
  double final_value() const { return log_survival.back(); }

  /// Linear interpolation of q at time t (t must lie within the grid).
  double value_at(double t) const {
    require(!time_grid.empty(), "empty survival curve");
    if (t <= time_grid.front()) return log_survival.front();
    const auto it = std::lower_bound(time_grid.begin(), time_grid.end(), t);
    require(it != time_grid.end() || t <= time_grid.back() * (1 + 1e-12), "time outside the survival curve grid");
    if (it == time_grid.end()) return log_survival.back();
    const auto j = static_cast<std::size_t>(it - time_grid.begin());
    if (time_grid[j] == t) return log_survival[j];
    const double w = (t - time_grid[j - 1]) / (time_grid[j] - time_grid[j - 1]);
    return log_survival[j - 1] + w * (log_survival[j] - log_survival[j - 1]);
  }
};

/// How the environment is modelled inside one grid step.
///   linear: the centre follows the linear interpolant of beta W.
///   bridge: beta W inside the step is a Brownian bridge between the grid
///     values, averaged out; each step kernel is then the conditional
///     expectation of the exact one given the grid values.
enum class StepModel { linear, bridge };

struct QuenchedOptions {
  int spatial_points = 201;
  StepModel step_model = StepModel::bridge;
  SeriesConfig series{};
  /// Spacing of recorded output times; 0 records every environment step.
  double output_interval = 0.0;
};

struct SplittingConfig {
  int n_particles = 10000;
  double resample_period = 0.01;
  std::uint64_t seed = 1;
  /// Independent sub-populations; their spread gives the standard error.
  int n_groups = 20;
  bool bridge_thinning = true;
  StepModel step_model = StepModel::bridge;
  double output_interval = 0.0;

  void validate() const {
    require(n_particles >= 100, "particle splitting needs at least 100 particles");
    require(n_groups >= 2 && n_particles / n_groups >= 10, "particle splitting needs >= 2 groups of >= 10 particles");
    require(resample_period > 0.0, "resample period must be positive");
  }
};

namespace detail {

// One constant-width, constant-drift segment of the corridor motion.
struct Piece {
  double duration;
  double slope;  // centre velocity; relative motion has drift -slope
  double width;
  double t_end;
  bool record;
};

inline std::size_t output_stride(double interval, double dt) {
  if (interval <= 0.0) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(interval / dt)));
}

/// Relative width change tolerated inside one piece of a functional corridor.
inline constexpr double kWidthTolerance = 1e-3;

inline std::vector<Piece> build_schedule(const EnvironmentPath& env, const Corridor& corridor, double horizon,
                                         double output_interval) {
  require(horizon > 0.0, "horizon must be positive");
  require(corridor.beta() == env.beta(), "corridor beta must match the environment beta");
  const std::size_t steps = grid_steps(horizon, env.dt());
  require(steps <= env.steps(), "environment grid does not cover the horizon");
  const double dt = env.dt();
  const double beta = env.beta();
  const std::size_t stride = output_stride(output_interval, dt);
  std::vector<Piece> pieces;
  pieces.reserve(steps);
  double block_width = corridor.width(0.5 * dt, horizon);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t0 = env.time(k);
    const double t1 = env.time(k + 1);
    const double shift = beta * (env[k + 1] - env[k]) + corridor.mid(t1, horizon) - corridor.mid(t0, horizon);
    const double slope = shift / dt;
    const bool record = (k + 1) % stride == 0 || k + 1 == steps;
    if (!corridor.time_varying()) {
      pieces.push_back({dt, slope, block_width, t1, record});
      continue;
    }
    const double w0 = corridor.width(t0, horizon);
    const double w1 = corridor.width(t1, horizon);
    const double wm = corridor.width(0.5 * (t0 + t1), horizon);
    const auto subdiv = static_cast<int>(std::ceil(std::abs(w1 - w0) / (kWidthTolerance * wm)));
    if (subdiv > 1) {
      for (int j = 0; j < subdiv; ++j) {
        const double sm = t0 + (j + 0.5) * dt / subdiv;
        pieces.push_back({dt / subdiv, slope, corridor.width(sm, horizon), t0 + (j + 1) * dt / subdiv,
                          record && j + 1 == subdiv});
      }
      block_width = pieces.back().width;
      continue;
    }
    if (std::abs(wm - block_width) > 0.5 * kWidthTolerance * block_width) block_width = wm;
    pieces.push_back({dt, slope, block_width, t1, record});
  }
  return pieces;
}

inline std::vector<double> midpoint_nodes(double width, int n) {
  std::vector<double> r(static_cast<std::size_t>(n));
  const double h = width / n;
  for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] = -0.5 * width + (j + 0.5) * h;
  return r;
}

// Driftless step density from x to y killed on leaving the band. Under the
// bridge model the relative motion given its endpoint is a Brownian bridge
// with diffusion coefficient 1 + beta^2, while the endpoint itself has
// variance `duration`.
inline double step_density(double x, double y, const BandSpec& band, double duration, double beta, StepModel model,
                           const SeriesConfig& cfg) {
  if (model == StepModel::linear || beta == 0.0) return absorbing_density(x, y, band, duration, cfg);
  return detail::gauss(y - x, duration) * bridge_band_survival(x, y, band, (1.0 + beta * beta) * duration, cfg);
}

// Step kernel on the midpoint grid, multiplied by the cell width.
inline Eigen::MatrixXd kernel_matrix(const std::vector<double>& nodes, double width, double duration, double beta,
                                     StepModel model, const SeriesConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  const double h = width / static_cast<double>(n);
  const BandSpec band(-0.5 * width, 0.5 * width);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = step_density(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)], band,
                                    duration, beta, model, cfg) * h;
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

// Cell masses of rows in `mass` re-expressed on a grid for a new band width.
inline void remap_rows(Eigen::MatrixXd& mass, double old_width, double new_width) {
  const auto n = mass.cols();
  const double h_old = old_width / static_cast<double>(n);
  const double h_new = new_width / static_cast<double>(n);
  const auto old_nodes = midpoint_nodes(old_width, static_cast<int>(n));
  const auto new_nodes = midpoint_nodes(new_width, static_cast<int>(n));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mass.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = new_nodes[static_cast<std::size_t>(j)];
    if (r <= -0.5 * old_width || r >= 0.5 * old_width) continue;
    // Locate r among [-L/2, nodes..., L/2] where the density is zero at the ends.
    const double pos = (r + 0.5 * old_width) / h_old - 0.5;
    const auto left = static_cast<Eigen::Index>(std::floor(pos));
    const double w = pos - static_cast<double>(left);
    for (Eigen::Index s = 0; s < mass.rows(); ++s) {
      const double dl = left >= 0 ? mass(s, left) / h_old : 0.0;
      const double dr = left + 1 < n ? mass(s, left + 1) / h_old : 0.0;
      double dens;
      if (left < 0) dens = dr * (r + 0.5 * old_width) / (0.5 * h_old);
      else if (left + 1 >= n) dens = dl * (0.5 * old_width - r) / (0.5 * h_old);
      else dens = dl + w * (dr - dl);
      out(s, j) = dens * h_new;
    }
  }
  mass = std::move(out);
}

// Indices of nodes whose position lies in [lo, hi].
inline std::vector<Eigen::Index> window_nodes(const std::vector<double>& nodes, double lo, double hi) {
  std::vector<Eigen::Index> idx;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (nodes[j] >= lo && nodes[j] <= hi) idx.push_back(static_cast<Eigen::Index>(j));
  return idx;
}

// Weights w such that sum_j mass_j w_j integrates the density over [lo, hi]
// (relative coordinates). The nodal values are expanded in the sine basis of
// the band (discrete sine transform on the midpoint grid) and the expansion is
// integrated exactly. This avoids the O(h^2) error of a plain cell sum for a
// density that vanishes linearly at the walls.
inline Eigen::VectorXd window_weights(double width, int n, double lo, double hi) {
  const double pi = std::numbers::pi;
  const double ul = std::clamp((lo + 0.5 * width) / width, 0.0, 1.0);
  const double uh = std::clamp((hi + 0.5 * width) / width, 0.0, 1.0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int k = 1; k <= n; ++k) {
    const double coef = (k < n ? 2.0 : 1.0) / n;
    const double integral = (std::cos(k * pi * ul) - std::cos(k * pi * uh)) / (k * pi);
    if (integral == 0.0) continue;
    for (int j = 0; j < n; ++j) w(j) += coef * integral * std::sin(k * pi * (j + 0.5) / n);
  }
  // w currently multiplies nodal density / width; masses are density * width / n.
  return w * static_cast<double>(n);
}

/// Largest |slope| * half-width for which the diagonal tilt stays in range.
inline constexpr double kMaxTiltExponent = 300.0;

struct ForwardResult {
  std::vector<double> times;
  std::vector<std::vector<double>> q;  // q[start][time]
};

/// Propagates point masses at `starts` (absolute, time 0). If `window` is set,
/// q at each output time counts only mass inside the window (absolute
/// coordinates relative to beta W_t, horizon geometry).
inline ForwardResult forward_sweep(const EnvironmentPath& env, const Corridor& corridor, double horizon,
                                   const std::vector<double>& starts, bool use_window, const QuenchedOptions& opts) {
  require(opts.spatial_points >= 32, "transfer operator needs at least 32 spatial points");
  opts.series.validate();
  const auto pieces = build_schedule(env, corridor, horizon, opts.output_interval);
  const int n = opts.spatial_points;
  const auto S = static_cast<Eigen::Index>(starts.size());
  const double beta = env.beta();

  ForwardResult out;
  out.q.assign(starts.size(), {});

  double width = pieces.front().width;
  auto nodes = midpoint_nodes(width, n);
  const double mid0 = corridor.mid(0.0, horizon);
  const double mid_end = corridor.mid(horizon, horizon);
  const Window tw = corridor.terminal_window(horizon);
  std::vector<Eigen::Index> win;
  Eigen::VectorXd weights;
  auto refresh_window = [&] {
    const double lo = use_window ? tw.lo - mid_end : -0.5 * width;
    const double hi = use_window ? tw.hi - mid_end : 0.5 * width;
    win = window_nodes(nodes, lo, hi);
    weights = window_weights(width, n, lo, hi);
  };
  refresh_window();

  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(S, n);
  std::vector<double> logacc(starts.size(), 0.0);
  std::vector<bool> alive(starts.size(), true);

  auto normalise = [&] {
    for (Eigen::Index s = 0; s < S; ++s) {
      if (!alive[static_cast<std::size_t>(s)]) continue;
      const double m = mass.row(s).sum();
      if (!(m > 0.0) || !std::isfinite(m)) {
        alive[static_cast<std::size_t>(s)] = false;
        mass.row(s).setZero();
        continue;
      }
      logacc[static_cast<std::size_t>(s)] += std::log(m);
      mass.row(s) /= m;
    }
  };
  auto record = [&](double t) {
    out.times.push_back(t);
    for (Eigen::Index s = 0; s < S; ++s) {
      const auto si = static_cast<std::size_t>(s);
      double q = kInf;
      if (alive[si]) {
        double inside = mass.row(s).dot(weights.transpose());
        if (!(inside > 0.0)) {
          inside = 0.0;
          for (Eigen::Index j : win) inside += mass(s, j);
        }
        q = inside > 0.0 ? -(logacc[si] + std::log(inside)) : kInf;
      }
      out.q[si].push_back(q);
    }
  };

  // First piece: exact kernel rows from the (possibly off-grid) start points.
  {
    const Piece& p = pieces.front();
    const BandSpec band(-0.5 * width, 0.5 * width);
    const double h = width / n;
    const double lo = use_window ? tw.lo - mid_end : -0.5 * width;
    const double hi = use_window ? tw.hi - mid_end : 0.5 * width;
    out.times.push_back(0.0);
    for (Eigen::Index s = 0; s < S; ++s) {
      const double r0 = starts[static_cast<std::size_t>(s)] - mid0;
      out.q[static_cast<std::size_t>(s)].push_back(band.interior(r0) && r0 >= lo && r0 <= hi ? 0.0 : kInf);
      if (!band.interior(r0)) {
        alive[static_cast<std::size_t>(s)] = false;
        continue;
      }
      for (int j = 0; j < n; ++j) {
        const double y = nodes[static_cast<std::size_t>(j)];
        const double tilt = p.slope * (r0 - y) - 0.5 * p.slope * p.slope * p.duration;
        mass(s, j) = step_density(r0, y, band, p.duration, beta, opts.step_model, opts.series) * std::exp(tilt) * h;
      }
    }
    normalise();
    if (p.record) record(p.t_end);
  }

  Eigen::MatrixXd kernel;
  double kernel_duration = -1.0;
  double kernel_width = -1.0;
  Eigen::RowVectorXd ex(n), ey(n);
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const Piece& p = pieces[k];
    if (p.width != width) {
      remap_rows(mass, width, p.width);
      width = p.width;
      nodes = midpoint_nodes(width, n);
      refresh_window();
      normalise();
    }
    if (p.duration != kernel_duration || p.width != kernel_width) {
      kernel = kernel_matrix(nodes, width, p.duration, beta, opts.step_model, opts.series);
      kernel_duration = p.duration;
      kernel_width = p.width;
    }
    const double c = p.slope;
    if (std::abs(c) * 0.5 * width <= kMaxTiltExponent) {
      for (int j = 0; j < n; ++j) {
        ex(j) = std::exp(c * nodes[static_cast<std::size_t>(j)]);
        ey(j) = 1.0 / ex(j);
      }
      mass = (mass.array().rowwise() * ex.array()).matrix() * kernel;
      mass.array().rowwise() *= ey.array();
      const double damp = -0.5 * c * c * p.duration;
      for (auto& l : logacc) l += damp;
    } else {
      const BandSpec band(-0.5 * width, 0.5 * width);
      Eigen::MatrixXd tilted(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double x = nodes[static_cast<std::size_t>(i)];
          const double y = nodes[static_cast<std::size_t>(j)];
          const double ld = std::log(step_density(x, y, band, p.duration, beta, opts.step_model, opts.series));
          tilted(i, j) = std::exp(ld + c * (x - y) - 0.5 * c * c * p.duration) * (width / n);
        }
      mass = mass * tilted;
    }
    normalise();
    if (p.record) record(p.t_end);
  }
  return out;
}

inline std::vector<double> spaced_points(double lo, double hi, int count) {
  require(count >= 1, "need at least one start point");
  if (count == 1 || lo == hi) return {0.5 * (lo + hi)};
  std::vector<double> x(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) x[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return x;
}

}  // namespace detail

/// q_t = -ln P^x(B stays in the corridor up to t, ends in the terminal window | W).
inline SurvivalCurve quenched_survival(const EnvironmentPath& env, const Corridor& corridor, double start,
                                       double horizon, const QuenchedOptions& opts = {}) {
  const auto res = detail::forward_sweep(env, corridor, horizon, {start}, true, opts);
  SurvivalCurve c;
  c.time_grid = res.times;
  c.log_survival = res.q.front();
  c.variant = SurvivalVariant::pointwise;
  c.start = start;
  c.corridor_id = corridor.id();
  c.environment_seed = env.seed();
  return c;
}

/// Negative log of the infimum over start_points equally spaced starts in the start window.
inline SurvivalCurve x_bar(const EnvironmentPath& env, const Corridor& corridor, double horizon, int start_points = 17,
                           const QuenchedOptions& opts = {}) {
  const Window sw = corridor.start_window(horizon);
  const auto starts = detail::spaced_points(sw.lo, sw.hi, start_points);
  const auto res = detail::forward_sweep(env, corridor, horizon, starts, true, opts);
  SurvivalCurve c;
  c.time_grid = res.times;
  c.log_survival.assign(res.times.size(), -kInf);
  for (const auto& row : res.q)
    for (std::size_t t = 0; t < row.size(); ++t) c.log_survival[t] = std::max(c.log_survival[t], row[t]);
  c.variant = SurvivalVariant::inf_start;
  c.corridor_id = corridor.id();
  c.environment_seed = env.seed();
  return c;
}

/// Negative log of the supremum over starts spanning the open band, no terminal restriction.
inline SurvivalCurve x_under(const EnvironmentPath& env, const Corridor& corridor, double horizon,
                             int start_points = 17, const QuenchedOptions& opts = {}) {
  require(start_points >= 1, "need at least one start point");
  const double lo = corridor.lower(0.0, horizon);
  const double hi = corridor.upper(0.0, horizon);
  std::vector<double> starts(static_cast<std::size_t>(start_points));
  for (int i = 0; i < start_points; ++i)
    starts[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 1) / (start_points + 1);
  const auto res = detail::forward_sweep(env, corridor, horizon, starts, false, opts);
  SurvivalCurve c;
  c.time_grid = res.times;
  c.log_survival.assign(res.times.size(), kInf);
  for (const auto& row : res.q)
    for (std::size_t t = 0; t < row.size(); ++t) c.log_survival[t] = std::min(c.log_survival[t], row[t]);
  c.variant = SurvivalVariant::sup_start;
  c.corridor_id = corridor.id();
  c.environment_seed = env.seed();
  return c;
}

/// Sequential Monte Carlo estimate of the pointwise curve. Walkers move in
/// the frame of the linearly interpolated centre, are killed on leaving the
/// band and, with bridge thinning, on an intra-step crossing with the bridge
/// exit probability. Each of n_groups sub-populations resamples
/// multinomially among its survivors every resample_period and yields an
/// unbiased estimate of p_t; q is minus the log of their mean and the
/// standard error follows from the delta method on that mean.
inline SurvivalCurve particle_splitting_survival(const EnvironmentPath& env, const Corridor& corridor, double start,
                                                 double horizon, const SplittingConfig& cfg,
                                                 const SeriesConfig& series = {}) {
  cfg.validate();
  const auto pieces = detail::build_schedule(env, corridor, horizon, cfg.output_interval);
  const int groups = cfg.n_groups;
  const int per_group = cfg.n_particles / groups;
  const double mid0 = corridor.mid(0.0, horizon);
  const double mid_end = corridor.mid(horizon, horizon);
  const Window tw = corridor.terminal_window(horizon);
  const double win_lo = tw.lo - mid_end;
  const double win_hi = tw.hi - mid_end;
  const double r0 = start - mid0;

  SurvivalCurve curve;
  curve.variant = SurvivalVariant::pointwise;
  curve.start = start;
  curve.corridor_id = corridor.id();
  curve.environment_seed = env.seed();
  curve.time_grid.push_back(0.0);
  for (const auto& p : pieces)
    if (p.record) curve.time_grid.push_back(p.t_end);
  const std::size_t n_out = curve.time_grid.size();
  if (!(std::abs(r0) < 0.5 * pieces.front().width)) {
    curve.log_survival.assign(n_out, kInf);
    curve.standard_error.assign(n_out, 0.0);
    return curve;
  }
  const double log_p0 = r0 >= win_lo && r0 <= win_hi ? 0.0 : kNegInf;

  // log p-hat per group per output time.
  std::vector<std::vector<double>> logp(static_cast<std::size_t>(groups), std::vector<double>(n_out, kNegInf));
  const std::size_t resample_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.resample_period / env.dt())));

  for (int g = 0; g < groups; ++g) {
    random::SequentialStream rng(random::derive_key(random::derive_key(cfg.seed, 0x5b17), static_cast<std::uint64_t>(g)));
    std::vector<double> pos(static_cast<std::size_t>(per_group), r0);
    std::vector<double> next;
    next.reserve(pos.size());
    double log_frac = 0.0;
    logp[static_cast<std::size_t>(g)][0] = log_p0;
    std::size_t out_i = 1;
    std::size_t step = 0;
    for (const auto& p : pieces) {
      const double half = 0.5 * p.width;
      const double sd = std::sqrt(p.duration);
      const double beta = env.beta();
      const double bridge_time =
          cfg.step_model == StepModel::bridge ? (1.0 + beta * beta) * p.duration : p.duration;
      const double drift = -p.slope * p.duration;
      const BandSpec band(-half, half);
      std::size_t w = 0;
      for (double x : pos) {
        if (!(x > -half && x < half)) continue;
        const double y = x + sd * rng.normal() + drift;
        if (!(y > -half && y < half)) continue;
        if (cfg.bridge_thinning) {
          const double e1 = 2.0 * (x + half) * (y + half) / bridge_time;
          const double e2 = 2.0 * (half - x) * (half - y) / bridge_time;
          if (e1 < 40.0 || e2 < 40.0) {
            if (rng.uniform() > bridge_band_survival(x, y, band, bridge_time, series)) continue;
          }
        }
        pos[w++] = y;
      }
      pos.resize(w);
      ++step;
      if (p.record) {
        std::size_t inside = 0;
        for (double x : pos)
          if (x >= win_lo && x <= win_hi) ++inside;
        logp[static_cast<std::size_t>(g)][out_i++] =
            inside > 0 ? log_frac + std::log(static_cast<double>(inside) / per_group) : kNegInf;
      }
      if (pos.empty()) break;
      if (step % resample_steps == 0 && static_cast<int>(pos.size()) < per_group) {
        log_frac += std::log(static_cast<double>(pos.size()) / per_group);
        next.clear();
        for (int i = 0; i < per_group; ++i) next.push_back(pos[rng.below(pos.size())]);
        pos.swap(next);
      }
    }
  }

  curve.log_survival.resize(n_out);
  curve.standard_error.resize(n_out);
  curve.log_survival[0] = log_p0 == 0.0 ? 0.0 : kInf;
  curve.standard_error[0] = 0.0;
  std::size_t last_valid = n_out;
  for (std::size_t t = 1; t < n_out; ++t) {
    double mx = kNegInf;
    for (int g = 0; g < groups; ++g) mx = std::max(mx, logp[static_cast<std::size_t>(g)][t]);
    if (mx == kNegInf) {
      last_valid = t;
      break;
    }
    double mean = 0.0, sq = 0.0;
    for (int g = 0; g < groups; ++g) {
      const double v = std::exp(logp[static_cast<std::size_t>(g)][t] - mx);
      mean += v;
      sq += v * v;
    }
    mean /= groups;
    const double var = std::max(0.0, (sq / groups - mean * mean) * groups / (groups - 1.0));
    curve.log_survival[t] = -(mx + std::log(mean));
    curve.standard_error[t] = std::sqrt(var / groups) / mean;
  }
  if (last_valid < n_out) {
    curve.truncated = true;
    curve.time_grid.resize(last_valid);
    curve.log_survival.resize(last_valid);
    curve.standard_error.resize(last_valid);
  }
  return curve;
}

// Columnar curve file: provenance header, then "t q [stderr]" rows.
inline void write_curve(std::ostream& os, const SurvivalCurve& c) {
  os << "# qcorr-curve env_seed=" << c.environment_seed << " corridor=" << c.corridor_id
     << " variant=" << to_string(c.variant);
  if (c.variant == SurvivalVariant::pointwise) os << " start=" << exact(c.start);
  if (c.truncated) os << " truncated=1";
  os << "\n";
  for (std::size_t i = 0; i < c.time_grid.size(); ++i) {
    os << exact(c.time_grid[i]) << ' ' << exact(c.log_survival[i]);
    if (!c.standard_error.empty()) os << ' ' << exact(c.standard_error[i]);
    os << '\n';
  }
  if (c.truncated) os << "# end-of-data\n";
}

inline SurvivalCurve read_curve(std::istream& is) {
  SurvivalCurve c;
  std::string line;
  std::getline(is, line);
  std::istringstream hs(line);
  std::string hash, tag, field;
  hs >> hash >> tag;
  require(hash == "#" && tag == "qcorr-curve", "not a survival curve file");
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "env_seed") c.environment_seed = std::stoull(val);
    else if (key == "corridor") c.corridor_id = val;
    else if (key == "start") c.start = std::stod(val);
    else if (key == "truncated") c.truncated = val == "1";
    else if (key == "variant")
      c.variant = val == "inf_start" ? SurvivalVariant::inf_start
                  : val == "sup_start" ? SurvivalVariant::sup_start
                                       : SurvivalVariant::pointwise;
  }
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double t = 0.0, q = 0.0, se = 0.0;
    std::string qs;
    ls >> t >> qs;
    q = qs == "inf" ? kInf : std::stod(qs);
    c.time_grid.push_back(t);
    c.log_survival.push_back(q);
    if (ls >> se) c.standard_error.push_back(se);
  }
  return c;
}

}  // namespace qcorr
