#include "destripe/gabor.hpp"

#include <cmath>
#include <numbers>

namespace destripe {

std::vector<GaborScale> default_gabor_scales() {
  return {
      {"short", 3.0, 0.5, 0.0},
      {"medium", 9.0, 0.8, 0.0},
      {"long", 27.0, 1.0, 0.0},
  };
}

GaborPattern make_gabor_pattern(StripeDirection theta, const GaborScale& scale) {
  if (!(scale.sigma_along > 0.0) || !(scale.sigma_across > 0.0)) {
    throw Error("gabor pattern: envelope widths must be positive");
  }
  const double c = theta.dx();
  const double s = theta.dy();
  const double sa = scale.sigma_along;
  const double sc = scale.sigma_across;
  // Three-sigma bounding box of the rotated envelope.
  const auto hx = static_cast<std::size_t>(std::ceil(3.0 * std::hypot(sa * c, sc * s)));
  const auto hy = static_cast<std::size_t>(std::ceil(3.0 * std::hypot(sa * s, sc * c)));
  Volume k(Dims{2 * hx + 1, 2 * hy + 1, 1});

  double sq = 0.0;
  for (std::size_t j = 0; j < k.dims().ny; ++j) {
    const double y = static_cast<double>(j) - static_cast<double>(hy);
    for (std::size_t i = 0; i < k.dims().nx; ++i) {
      const double x = static_cast<double>(i) - static_cast<double>(hx);
      const double along = x * c + y * s;
      const double across = -x * s + y * c;
      const double env = std::exp(-(along * along) / (2.0 * sa * sa) - (across * across) / (2.0 * sc * sc));
      const double v = env * std::cos(2.0 * std::numbers::pi * scale.frequency * across);
      k(i, j) = v;
      sq += v * v;
    }
  }
  if (!(sq > 0.0)) throw Error("gabor pattern: kernel vanished");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : k.values()) v *= inv;
  return {scale.label, std::move(k)};
}

std::vector<GaborPattern> make_gabor_patterns(StripeDirection theta, const std::vector<GaborScale>& scales) {
  std::vector<GaborPattern> out;
  out.reserve(scales.size());
  for (const auto& sc : scales) out.push_back(make_gabor_pattern(theta, sc));
  return out;
}

}  // namespace destripe
