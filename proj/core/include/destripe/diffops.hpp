#pragma once

#include <span>
#include <vector>

#include "destripe/volume.hpp"

namespace destripe {

// Forward differences with Neumann boundary: the last difference along an
// axis is zero, so constant fields have exactly zero gradient. Differences
// along z on a 2D volume are identically zero.

Volume forward_diff(const Volume& v, Axis axis);
/// Exact adjoint of forward_diff (negative divergence, same boundary rule).
Volume adjoint_diff(const Volume& p, Axis axis);

/// (D_theta v)(p) = v~(p + (cos theta, sin theta)) - v(p) with v~ the bilinear
/// interpolant, applied per x-y slice. Zero wherever the shifted point leaves
/// the slice. At theta = pi/2 this is forward_diff along y.
Volume oblique_diff(const Volume& v, StripeDirection theta);
Volume oblique_adjoint(const Volume& p, StripeDirection theta);

/// One linear channel of a stacked difference operator.
class DiffOperator {
 public:
  enum class Kind { AxisAligned, Oblique };

  static DiffOperator axis(Axis a, double weight = 1.0);
  static DiffOperator oblique(StripeDirection theta);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] Axis axis() const noexcept { return axis_; }
  [[nodiscard]] StripeDirection direction() const noexcept { return theta_; }
  [[nodiscard]] double weight() const noexcept { return weight_; }

  /// out = D in
  void apply(std::span<const double> in, std::span<double> out, const Dims& dims) const;
  /// out (+)= D^T p. With accumulate=false the output is overwritten.
  void apply_adjoint(std::span<const double> p, std::span<double> out, const Dims& dims,
                     bool accumulate = false) const;

  [[nodiscard]] Volume apply(const Volume& v) const;
  [[nodiscard]] Volume apply_adjoint(const Volume& p) const;

  /// Upper bound on the spectral norm on a grid of the given dims.
  [[nodiscard]] double norm_bound(const Dims& dims) const noexcept;

 private:
  DiffOperator(Kind k, Axis a, StripeDirection t, double w) : kind_(k), axis_(a), theta_(t), weight_(w) {}

  Kind kind_;
  Axis axis_;
  StripeDirection theta_;
  double weight_;
};

/// Channels applied jointly: K u = (D_1 u, ..., D_m u), K^T p = sum_i D_i^T p_i.
class StackedOperator {
 public:
  StackedOperator() = default;
  explicit StackedOperator(std::vector<DiffOperator> channels) : channels_(std::move(channels)) {}

  void push_back(DiffOperator op) { channels_.push_back(op); }
  [[nodiscard]] const std::vector<DiffOperator>& channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t size() const noexcept { return channels_.size(); }

  [[nodiscard]] std::vector<Volume> apply(const Volume& v) const;
  [[nodiscard]] Volume apply_adjoint(const std::vector<Volume>& p) const;

 private:
  std::vector<DiffOperator> channels_;
};

/// Gradient stack of the total variation: (dx, dy) in 2D, (dx, dy, rho_z dz) in 3D.
StackedOperator tv_operator(const Dims& dims, double rho_z = 1.0);

/// Root of the summed squared per-channel bounds, each 2 * weight.
double operator_norm_bound(const DiffOperator& op, const Dims& dims);
double operator_norm_bound(const StackedOperator& op, const Dims& dims);

}  // namespace destripe
