#pragma once

// Environment Brownian paths on uniform grids.
//
// A path is stored as (dt, values); grid times are k * dt. The seed fully
// determines the path:
//   * bit 63 is the mirror flag: seed | kMirrorBit yields exactly -W for the
//     path generated by seed,
//   * the remaining 63 bits select the stream, increment k is
//     sqrt(dt) * random::normal(stream_key(seed), k).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/format.hpp"
#include "qcorr/random.hpp"

namespace qcorr {

inline constexpr std::uint64_t kMirrorBit = std::uint64_t{1} << 63;

inline constexpr bool is_mirrored(std::uint64_t seed) noexcept { return (seed & kMirrorBit) != 0; }
inline constexpr std::uint64_t mirror_seed(std::uint64_t seed) noexcept { return seed ^ kMirrorBit; }

inline constexpr std::uint64_t stream_key(std::uint64_t seed) noexcept {
  return random::derive_key(seed & ~kMirrorBit, 0x5eed);
}

class EnvironmentPath {
 public:
  EnvironmentPath() = default;
  EnvironmentPath(double dt, std::vector<double> values, double beta, std::uint64_t seed)
      : dt_(dt), values_(std::move(values)), beta_(beta), seed_(seed) {
    require(dt_ > 0.0, "environment grid spacing must be positive");
    require(values_.size() >= 2, "environment path needs at least two grid points");
    require(values_.front() == 0.0, "environment path must start at W_0 = 0");
  }

  double dt() const noexcept { return dt_; }
  double beta() const noexcept { return beta_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t steps() const noexcept { return values_.size() - 1; }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }
  double horizon() const noexcept { return time(steps()); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  std::vector<double> times() const {
    std::vector<double> t(size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
    return t;
  }

  /// Piecewise-linear interpolant at time s (clamped to the grid).
  double at(double s) const noexcept {
    if (s <= 0.0) return values_.front();
    const double pos = s / dt_;
    const auto k = static_cast<std::size_t>(pos);
    if (k >= steps()) return values_.back();
    const double w = pos - static_cast<double>(k);
    return values_[k] + w * (values_[k + 1] - values_[k]);
  }

  /// Same path with a different coupling amplitude.
  EnvironmentPath with_beta(double beta) const {
    EnvironmentPath copy = *this;
    copy.beta_ = beta;
    return copy;
  }

 private:
  double dt_ = 1.0;
  std::vector<double> values_{0.0, 0.0};
  double beta_ = 0.0;
  std::uint64_t seed_ = 0;
};

inline std::size_t grid_steps(double horizon, double dt) {
  const double ratio = horizon / dt;
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  return std::max<std::size_t>(n, 1);
}

inline EnvironmentPath sample_environment(std::uint64_t seed, double horizon, double dt, double beta) {
  require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  require(dt <= horizon, "dt must not exceed the horizon");
  const std::size_t n = grid_steps(horizon, dt);
  const std::uint64_t key = stream_key(seed);
  const double scale = is_mirrored(seed) ? -std::sqrt(dt) : std::sqrt(dt);
  std::vector<double> w(n + 1);
  w[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) w[k + 1] = w[k] + scale * random::normal(key, k);
  return EnvironmentPath(dt, std::move(w), beta, seed);
}

/// Inserts factor-1 Brownian-bridge points into every grid step. Noise for
/// segment k of a parent grid with n steps comes from the stream
/// derive_key(derive_key(stream_key(seed), n), k).
inline EnvironmentPath refine_environment(const EnvironmentPath& path, int factor) {
  require(factor >= 2, "refinement factor must be at least 2");
  const std::size_t n = path.steps();
  const double fine_dt = path.dt() / factor;
  const double sign = is_mirrored(path.seed()) ? -1.0 : 1.0;
  const std::uint64_t level_key = random::derive_key(stream_key(path.seed()), n);
  std::vector<double> out(n * static_cast<std::size_t>(factor) + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = path[k];
    const double right = path[k + 1];
    const std::uint64_t key = random::derive_key(level_key, k);
    const std::size_t base = k * static_cast<std::size_t>(factor);
    out[base] = left;
    double prev = left;
    for (int j = 1; j < factor; ++j) {
      // Bridge from (j-1) to the segment end, remaining steps factor-j+1.
      const double remaining = static_cast<double>(factor - j + 1);
      const double mean = prev + (right - prev) / remaining;
      const double var = fine_dt * (remaining - 1.0) / remaining;
      prev = mean + sign * std::sqrt(var) * random::normal(key, static_cast<std::uint64_t>(j - 1));
      out[base + static_cast<std::size_t>(j)] = prev;
    }
  }
  out.back() = path[n];
  return EnvironmentPath(fine_dt, std::move(out), path.beta(), path.seed());
}

struct DeltaLadder {
  double delta = 0.0;
  std::vector<double> tau;  // tau[0] = 0, then successive ladder times
  std::vector<double> rho;  // rho[k-1] = tau[k] - tau[k-1]
  std::size_t count_before = 0;
  bool coarse_grid_warning = false;
};

/// Ladder times tau_{n+1} = first grid time after tau_n with
/// |W - W(tau_n)| >= delta. count_before = sup{n : tau_n < horizon}.
inline DeltaLadder delta_ladder(const EnvironmentPath& path, double delta, double horizon) {
  require(delta > 0.0, "ladder width delta must be positive");
  require(horizon > 0.0 && horizon <= path.horizon() * (1.0 + 1e-12), "environment must cover the horizon");
  DeltaLadder ladder;
  ladder.delta = delta;
  ladder.coarse_grid_warning = delta * delta < 10.0 * path.dt();
  ladder.tau.push_back(0.0);
  double anchor = path[0];
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (std::abs(path[k] - anchor) >= delta) {
      const double t = path.time(k);
      ladder.rho.push_back(t - ladder.tau.back());
      ladder.tau.push_back(t);
      anchor = path[k];
    }
  }
  for (std::size_t n = 0; n < ladder.tau.size(); ++n)
    if (ladder.tau[n] < horizon) ladder.count_before = n;
  return ladder;
}

// Columnar dump: "# qcorr-env seed=<u64> dt=<x> beta=<x>" then "time value" rows.
inline void write_environment(std::ostream& os, const EnvironmentPath& path) {
  os << "# qcorr-env seed=" << path.seed() << " dt=" << exact(path.dt()) << " beta=" << exact(path.beta())
     << "\n";
  for (std::size_t k = 0; k < path.size(); ++k) os << exact(path.time(k)) << ' ' << exact(path[k]) << '\n';
}

inline EnvironmentPath read_environment(std::istream& is) {
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string hash, tag, field;
  hs >> hash >> tag;
  require(hash == "#" && tag == "qcorr-env", "not an environment file");
  std::uint64_t seed = 0;
  double dt = 0.0, beta = 0.0;
  while (hs >> field) {
    const auto eq = field.find('=');
    require(eq != std::string::npos, "malformed environment header field: " + field);
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "seed") seed = std::stoull(val);
    else if (key == "dt") dt = std::stod(val);
    else if (key == "beta") beta = std::stod(val);
  }
  std::vector<double> values;
  double t = 0.0, w = 0.0;
  while (is >> t >> w) values.push_back(w);
  return EnvironmentPath(dt, std::move(values), beta, seed);
}

}  // namespace qcorr
