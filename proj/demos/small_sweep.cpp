// A reduced gamma(beta) sweep and its property report.
#include <cstdio>

#include "qcorr/rates.hpp"

int main() {
  qcorr::SweepConfig cfg;
  cfg.betas = {0.0, 0.5, 1.0};
  cfg.ensemble_size = 8;
  cfg.horizon = 6.0;
  cfg.env_dt = 2e-3;
  cfg.start_points = 5;
  cfg.quenched.spatial_points = 48;
  cfg.master_seed = 7;
  const auto res = qcorr::gamma_sweep(cfg);
  for (std::size_t i = 0; i < res.curve.betas.size(); ++i) {
    const auto& e = res.curve.estimates[i];
    std::printf("beta=%4.2f  gamma=%8.4f  ci=[%8.4f, %8.4f]\n", res.curve.betas[i], e.gamma, e.ci_low, e.ci_high);
  }
  std::printf("%s\n", qcorr::to_json(qcorr::property_report(res.curve)).dump(2).c_str());
}
