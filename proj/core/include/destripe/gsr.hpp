#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "destripe/diffops.hpp"
#include "destripe/volume.hpp"

namespace destripe {

enum class Dimensionality {
  Auto,   ///< 3D total variation for nz > 1, 2D otherwise
  TwoD,   ///< in-plane total variation only (independent slices)
  ThreeD,
};

/// Weights of the general stripe remover objective
///   mu1 |grad u|_{2,1} + sum_i |D_theta_i (u0 - u)|_1 + mu2 |u0 - u|_1 + iota_[0,1](u).
/// mu1 sets smoothness, mu2 counteracts it by charging for stripe mass; their
/// ratio shapes what counts as a stripe, a common scale sets how much is removed.
struct GsrParams {
  double mu1 = 1.0 / 3.0;
  double mu2 = 1.0 / 300.0;
  double rho_z = 1.0;
  std::vector<StripeDirection> directions{StripeDirection::vertical()};
  Dimensionality dimensionality = Dimensionality::Auto;

  void validate() const;
};

struct SolverSettings {
  std::size_t max_iters = 25000;
  std::optional<double> tau;    ///< primal step, default 0.99 / L
  std::optional<double> sigma;  ///< dual step, default 0.99 / L
  double extrapolation = 1.0;
  double tolerance = 0.0;        ///< relative-change early stop; 0 runs all iterations
  std::size_t log_stride = 0;    ///< objective logged every n iterations (0: first and last only)
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<std::pair<std::size_t, double>> objective_trace;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double wall_time_seconds = 0.0;
  double constraint_residual = 0.0;  ///< max |u + s - u0|
  double tau = 0.0;
  double sigma = 0.0;
  double operator_norm = 0.0;
  bool stopped_early = false;
  /// The iterate ended above the do-nothing objective and u0 was returned instead.
  bool fell_back_to_input = false;
};

/// Objective value; +infinity when u leaves [0, 1].
double gsr_objective(const Volume& u0, const Volume& u, const GsrParams& params);

/// Primal-dual solver (dual extrapolation) for the objective above with
/// s := u0 - u eliminated. Steps must satisfy tau * sigma * L^2 <= 1.
class GsrSolver {
 public:
  GsrSolver(const Volume& u0, GsrParams params, SolverSettings settings = {});

  [[nodiscard]] const StackedOperator& tv() const noexcept { return tv_; }
  [[nodiscard]] const StackedOperator& stripe_ops() const noexcept { return stripe_; }
  [[nodiscard]] double operator_norm() const noexcept { return norm_; }
  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }

  std::pair<StripeDecomposition, SolveReport> run() const;

 private:
  Volume u0_;
  GsrParams params_;
  SolverSettings settings_;
  StackedOperator tv_;
  StackedOperator stripe_;
  double norm_ = 0.0;
  double tau_ = 0.0;
  double sigma_ = 0.0;
};

std::pair<StripeDecomposition, SolveReport> solve_gsr(const Volume& u0, const GsrParams& params = {},
                                                      const SolverSettings& settings = {});

/// Same solver with user-supplied stripe directions (one l1 channel per angle).
std::pair<StripeDecomposition, SolveReport> solve_gsr_oblique(const Volume& u0, const GsrParams& params,
                                                              const SolverSettings& settings = {});

/// Gradient stack used by the objective for the given params and dims.
StackedOperator gsr_tv_operator(const Dims& dims, const GsrParams& params);

}  // namespace destripe
