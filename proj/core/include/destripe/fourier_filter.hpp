#pragma once

#include <cstddef>
#include <vector>

#include "destripe/volume.hpp"

namespace destripe {

/// Directional Fourier damping. The frequency plane is split into n_dir
/// angular wedges; wedges whose orientation is within pi/4 of the stripe
/// direction get the Gaussian notch 1 - exp(-d^2 / (2 sigma_i^2)), where d is
/// the distance (in bins) from the stripe band through the origin and
/// sigma_i = sigma * exp(-(theta_0 - theta_i)^2 / (2 sigma_a^2)).
struct FourierFilterParams {
  double sigma = 12.0;
  double sigma_a = 0.3;
  std::size_t n_dir = 8;
  StripeDirection direction = StripeDirection::vertical();
  double protect_radius = 3.0;  ///< low frequencies within this radius (bins) pass untouched
  /// Raised-cosine half-width of each wedge in units of the wedge spacing pi / n_dir.
  /// Must exceed 0.5 so the wedges cover every orientation.
  double wedge_smoothing = 1.0;

  void validate() const;
};

/// Orientation (stripe direction, in [0, pi)) of the i-th wedge centre.
double wedge_angle(std::size_t i, const FourierFilterParams& params);

/// Damping factor sigma_i of a wedge at orientation theta_i.
double wedge_sigma(double theta_i, const FourierFilterParams& params);

/// Multiplicative mask of a single wedge, nx-by-ny in FFT bin order.
/// All ones when the wedge is further than pi/4 from the stripe direction.
Volume damping_mask(const Dims& dims, double theta_i, const FourierFilterParams& params);

/// Wedge-weighted combination of the single-wedge masks, symmetric under
/// k -> -k so filtered images stay real.
Volume combined_mask(const Dims& dims, const FourierFilterParams& params);

struct FilterReport {
  double max_imag_residue = 0.0;
};

Volume filter_slice(const Volume& slice, const FourierFilterParams& params, FilterReport* report = nullptr);

/// Slice-wise filtering of every x-y plane; stripes = input - output.
/// Output is not clipped.
StripeDecomposition filter_volume(const Volume& v, const FourierFilterParams& params,
                                  FilterReport* report = nullptr);

}  // namespace destripe
