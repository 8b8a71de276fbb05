#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "destripe/volume.hpp"

namespace destripe {

double mse(const Volume& u, const Volume& reference);

/// -10 log10(MSE). Identical inputs give +infinity. No clipping is applied.
double psnr(const Volume& u, const Volume& reference);

struct MsSsimResult {
  double value = 1.0;
  std::size_t levels = 5;
  bool reduced_levels = false;  ///< fewer than five scales fit; exponents renormalised
};

/// Canonical MS-SSIM exponents for five scales.
inline constexpr std::array<double, 5> kMsSsimWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

/// Mean SSIM over the valid region (11x11 Gaussian window, sigma 1.5,
/// k1 = 0.01, k2 = 0.03, unit dynamic range). 2D only.
double ssim(const Volume& u, const Volume& reference);

/// Multi-scale SSIM; 3D inputs are averaged over x-y slices.
/// Negative per-scale contrast-structure terms are clamped at zero.
MsSsimResult ms_ssim(const Volume& u, const Volume& reference, std::size_t max_levels = 5);

struct CurtainingParams {
  StripeDirection direction = StripeDirection::vertical();
  double band_halfwidth = 2.0;   ///< h, in frequency bins
  double exclude_radius = 5.0;   ///< r, low-frequency disk left out of both sets
};

struct CurtainingResult {
  double score = 1.0;
  bool degenerate = false;  ///< no AC power outside the excluded disk
};

/// Reference-free stripe score in [0, 1] (1 = no stripes). The band B holds
/// bins within h of the line through the origin orthogonal to the stripes;
/// score = 1 - clamp((mean_B - mean_rest) / (mean_B + mean_rest), 0, 1).
/// 3D inputs are averaged over slices.
CurtainingResult curtaining(const Volume& u, const CurtainingParams& params = {});

struct MetricReport {
  std::optional<double> psnr;
  std::optional<double> ms_ssim;
  std::size_t ms_ssim_levels = 0;
  bool ms_ssim_reduced = false;
  double curtaining = 1.0;
  bool curtaining_degenerate = false;

  [[nodiscard]] bool has_reference() const noexcept { return psnr.has_value(); }
};

MetricReport evaluate(const Volume& u, const Volume* reference, const CurtainingParams& params = {});

/// Shortest round-trip decimal; "inf" for +infinity.
std::string format_number(double v);

/// key=value lines; metrics needing a reference are written as "unavailable".
std::string to_key_value(const MetricReport& report);
std::string csv_header();
std::string to_csv_row(const MetricReport& report);

}  // namespace destripe
