// One environment at beta = 1: q_t for the inf-over-starts variant and its fitted slope.
#include <cstdio>

#include "qcorr/env.hpp"
#include "qcorr/quenched.hpp"
#include "qcorr/rates.hpp"

int main() {
  const double beta = 1.0, horizon = 8.0;
  const auto env = qcorr::sample_environment(42, horizon, 2e-3, beta);
  const auto corridor = qcorr::Corridor::constant(0.0, 1.0, {0.2, 0.8}, {0.2, 0.8}, beta);
  qcorr::QuenchedOptions opts;
  opts.spatial_points = 64;
  opts.output_interval = 1.0;
  const auto curve = qcorr::x_bar(env, corridor, horizon, 9, opts);
  for (std::size_t i = 0; i < curve.time_grid.size(); ++i)
    std::printf("t=%5.2f  q=%10.5f\n", curve.time_grid[i], curve.log_survival[i]);
  const auto est = qcorr::extract_rate({curve}, {2.0, horizon});
  std::printf("slope over [2, %.0f]: %.4f (r^2 %.5f)\n", horizon, est.gamma, est.r_squared);
}
