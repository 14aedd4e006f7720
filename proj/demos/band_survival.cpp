// Survival of Brownian motion in the fixed band (0,1): image and eigen series side by side.
#include <cmath>
#include <numbers>
#include <cstdio>

#include "qcorr/kernels.hpp"

int main() {
  const qcorr::BandSpec band(0.0, 1.0);
  const qcorr::SeriesConfig cfg{};
  std::printf("%6s %16s %16s %12s\n", "t", "images", "eigen", "-ln S / t");
  for (double t : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double si = qcorr::detail::survival_images(0.5, band, t, cfg);
    const double se = qcorr::detail::survival_eigen(0.5, band, t, cfg);
    std::printf("%6.2f %16.12f %16.12f %12.6f\n", t, si, se, -qcorr::log_band_survival_fixed(0.5, band, t) / t);
  }
  std::printf("pi^2/2 = %.6f\n", 0.5 * std::numbers::pi * std::numbers::pi);
}
