#pragma once

#include <optional>
#include <vector>

#include "destripe/gabor.hpp"
#include "destripe/gsr.hpp"
#include "destripe/volume.hpp"

namespace destripe {

/// Stationary-noise model: stripes s = sum_i lambda_i * psi_i with sparse
/// weight maps |lambda_i|_inf <= 1, clean image u = u0 - s, minimising
///   sum phi_eps(|grad u|) + sum_i alpha_i |lambda_i|_1.
struct VsnrParams {
  std::vector<double> alphas{3.0, 5.0, 10.0};
  double epsilon = 1e-2;
  std::size_t max_iters = 25000;
  std::optional<double> tau;
  std::optional<double> sigma;
  double extrapolation = 1.0;
  double tolerance = 0.0;
  std::size_t log_stride = 0;

  void validate(std::size_t pattern_count) const;
};

struct VsnrResult {
  StripeDecomposition decomposition;
  std::vector<Volume> weights;  ///< lambda_i, one map per pattern
  SolveReport report;
};

/// Periodic convolution of a 2D image with a centred kernel, via FFT.
Volume convolve_periodic(const Volume& image, const Volume& kernel);

/// Sum of weights[i] * patterns[i] (periodic).
Volume synthesize_stripes(const std::vector<Volume>& weights, const std::vector<GaborPattern>& patterns);

double vsnr_objective(const Volume& u0, const std::vector<Volume>& weights,
                      const std::vector<GaborPattern>& patterns, const VsnrParams& params);

VsnrResult solve_vsnr(const Volume& u0, const std::vector<GaborPattern>& patterns, const VsnrParams& params = {});

}  // namespace destripe
