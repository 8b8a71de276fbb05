#pragma once

#include <string>
#include <vector>

#include "destripe/volume.hpp"

namespace destripe {

/// Envelope and carrier of one elementary stripe pattern.
struct GaborScale {
  std::string label;
  double sigma_along = 9.0;   ///< Gaussian std along the stripe, pixels
  double sigma_across = 0.8;  ///< Gaussian std across the stripe, pixels
  double frequency = 0.0;     ///< carrier frequency across the stripe, cycles per pixel
};

/// Short, medium and long elongated envelopes without carrier.
std::vector<GaborScale> default_gabor_scales();

/// Real part of a Gabor filter, unit l2 norm, centred in a (kx, ky) box.
struct GaborPattern {
  std::string label;
  Volume kernel;  ///< kx-by-ky, nz = 1

  [[nodiscard]] std::size_t kx() const noexcept { return kernel.dims().nx; }
  [[nodiscard]] std::size_t ky() const noexcept { return kernel.dims().ny; }
};

GaborPattern make_gabor_pattern(StripeDirection theta, const GaborScale& scale);
std::vector<GaborPattern> make_gabor_patterns(StripeDirection theta,
                                              const std::vector<GaborScale>& scales = default_gabor_scales());

}  // namespace destripe
