#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace destripe::prox {

// Scalar kernels. Every field-level operator below is an element-wise map of
// one of these, so they are kept inline for the solver loops.

/// argmin_t lambda |t| + (t - x)^2 / 2
inline double soft_threshold(double x, double lambda) noexcept {
  const double a = std::abs(x) - lambda;
  return a > 0.0 ? std::copysign(a, x) : 0.0;
}

inline double clamp01(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

/// Prox of sigma f* for f(z) = |b - z|, i.e. clamp(y - sigma b, -1, 1).
inline double conjugate_l1_shifted(double y, double sigma, double b) noexcept {
  return std::clamp(y - sigma * b, -1.0, 1.0);
}

/// Huber function phi_eps(x) = x^2/(2 eps) for |x| <= eps, |x| - eps/2 otherwise.
inline double huber(double x, double eps) noexcept {
  const double a = std::abs(x);
  return a <= eps ? a * a / (2.0 * eps) : a - eps / 2.0;
}

/// argmin_t lambda phi_eps(t) + (t - x)^2 / 2
inline double huber_prox(double x, double lambda, double eps) noexcept {
  if (std::abs(x) <= eps + lambda) return x * eps / (eps + lambda);
  return x - std::copysign(lambda, x);
}

/// argmin_t lambda |t - center| + iota_[0,1](t) + (t - x)^2 / 2
inline double l1_toward_box01(double x, double lambda, double center) noexcept {
  return clamp01(center + soft_threshold(x - center, lambda));
}

// Field-level operators.

void prox_l1(std::span<double> x, double lambda);
[[nodiscard]] std::vector<double> prox_l1(std::span<const double> x, double lambda);

void project_box01(std::span<double> x);
[[nodiscard]] std::vector<double> project_box01(std::span<const double> x);

/// Per-voxel projection of the vector (p_1[i], ..., p_m[i]) onto the l2 ball
/// of radius `radius`: g -> g / max(1, |g| / radius). Dual of radius * l21.
void project_l2_ball_groups(std::span<const std::span<double>> channels, double radius);

void prox_conjugate_l1_shifted(std::span<double> y, double sigma, std::span<const double> shift);

void prox_huber(std::span<double> x, double lambda, double eps);

/// Prox of lambda * sum_i phi_eps(|g_i|) on per-voxel vectors (isotropic Huber-TV).
void prox_group_huber(std::span<const std::span<double>> channels, double lambda, double eps);

/// Prox of sigma F* where F(z) = sum_i phi_eps(|b_i - z_i|), computed from
/// prox_group_huber through the Moreau decomposition.
void prox_conjugate_group_huber_shifted(std::span<const std::span<double>> channels, double sigma,
                                        double eps, std::span<const std::span<const double>> shift);

/// Composite prox of lambda |t - center| + iota_[0,1] (element-wise).
void prox_l1_toward_box01(std::span<double> x, double lambda, std::span<const double> center);

}  // namespace destripe::prox
