#include "destripe/diffops.hpp"

#include <algorithm>
#include <cmath>

namespace destripe {
namespace {

struct Stride {
  std::size_t step;   // linear offset between neighbours along the axis
  std::size_t count;  // number of samples along the axis
  std::size_t outer;  // product of dims after the axis
  std::size_t inner;  // product of dims before the axis
};

Stride stride_of(const Dims& d, Axis axis) {
  switch (axis) {
    case Axis::X: return {1, d.nx, d.ny * d.nz, 1};
    case Axis::Y: return {d.nx, d.ny, d.nz, d.nx};
    case Axis::Z: return {d.nx * d.ny, d.nz, 1, d.nx * d.ny};
  }
  return {1, d.nx, d.ny * d.nz, 1};
}

void axis_forward(std::span<const double> in, std::span<double> out, const Dims& d, Axis axis,
                  double w) {
  const Stride s = stride_of(d, axis);
  for (std::size_t o = 0; o < s.outer; ++o) {
    const std::size_t base = o * s.count * s.inner;
    for (std::size_t k = 0; k + 1 < s.count; ++k) {
      const std::size_t row = base + k * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) {
        out[row + i] = w * (in[row + i + s.step] - in[row + i]);
      }
    }
    const std::size_t last = base + (s.count - 1) * s.inner;
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(last), s.inner, 0.0);
  }
}

void axis_adjoint(std::span<const double> p, std::span<double> out, const Dims& d, Axis axis,
                  double w, bool accumulate) {
  const Stride s = stride_of(d, axis);
  if (!accumulate) std::fill(out.begin(), out.end(), 0.0);
  if (s.count == 1) return;
  for (std::size_t o = 0; o < s.outer; ++o) {
    const std::size_t base = o * s.count * s.inner;
    for (std::size_t k = 0; k < s.count; ++k) {
      const std::size_t row = base + k * s.inner;
      const bool has_prev = k > 0;
      const bool has_self = k + 1 < s.count;
      for (std::size_t i = 0; i < s.inner; ++i) {
        double acc = 0.0;
        if (has_prev) acc += p[row + i - s.step];
        if (has_self) acc -= p[row + i];
        out[row + i] += w * acc;
      }
    }
  }
}

// Bilinear sampling stencil for a constant shift (dx, dy).
struct ShiftStencil {
  long ox, oy;
  double w00, w10, w01, w11;
  bool need_x1, need_y1;
};

ShiftStencil make_stencil(StripeDirection theta) {
  const double dx = theta.dx();
  const double dy = theta.dy();
  ShiftStencil st{};
  st.ox = static_cast<long>(std::floor(dx));
  st.oy = static_cast<long>(std::floor(dy));
  const double fx = dx - static_cast<double>(st.ox);
  const double fy = dy - static_cast<double>(st.oy);
  st.w00 = (1.0 - fx) * (1.0 - fy);
  st.w10 = fx * (1.0 - fy);
  st.w01 = (1.0 - fx) * fy;
  st.w11 = fx * fy;
  st.need_x1 = fx != 0.0;
  st.need_y1 = fy != 0.0;
  return st;
}

template <typename Fn>
void for_each_inside(const Dims& d, const ShiftStencil& st, Fn&& fn) {
  const long nx = static_cast<long>(d.nx);
  const long ny = static_cast<long>(d.ny);
  const long xmax = st.need_x1 ? nx - 2 : nx - 1;
  const long ymax = st.need_y1 ? ny - 2 : ny - 1;
  for (std::size_t z = 0; z < d.nz; ++z) {
    const std::size_t zoff = z * d.slice_size();
    for (long y = 0; y < ny; ++y) {
      const long y0 = y + st.oy;
      if (y0 < 0 || y0 > ymax) continue;
      for (long x = 0; x < nx; ++x) {
        const long x0 = x + st.ox;
        if (x0 < 0 || x0 > xmax) continue;
        fn(zoff + static_cast<std::size_t>(x + nx * y), zoff + static_cast<std::size_t>(x0 + nx * y0));
      }
    }
  }
}

void oblique_forward(std::span<const double> in, std::span<double> out, const Dims& d,
                     StripeDirection theta) {
  std::fill(out.begin(), out.end(), 0.0);
  const ShiftStencil st = make_stencil(theta);
  const std::size_t nx = d.nx;
  for_each_inside(d, st, [&](std::size_t p, std::size_t q) {
    double v = 0.0;
    if (st.w00 != 0.0) v += st.w00 * in[q];
    if (st.w10 != 0.0) v += st.w10 * in[q + 1];
    if (st.w01 != 0.0) v += st.w01 * in[q + nx];
    if (st.w11 != 0.0) v += st.w11 * in[q + nx + 1];
    out[p] = v - in[p];
  });
}

void oblique_transpose(std::span<const double> p, std::span<double> out, const Dims& d,
                       StripeDirection theta, bool accumulate) {
  if (!accumulate) std::fill(out.begin(), out.end(), 0.0);
  const ShiftStencil st = make_stencil(theta);
  const std::size_t nx = d.nx;
  for_each_inside(d, st, [&](std::size_t i, std::size_t q) {
    const double g = p[i];
    if (st.w00 != 0.0) out[q] += st.w00 * g;
    if (st.w10 != 0.0) out[q + 1] += st.w10 * g;
    if (st.w01 != 0.0) out[q + nx] += st.w01 * g;
    if (st.w11 != 0.0) out[q + nx + 1] += st.w11 * g;
    out[i] -= g;
  });
}

void check_len(std::size_t n, const Dims& d, const char* what) {
  if (n != d.size()) throw Error(std::string(what) + ": field length does not match dims " + to_string(d));
}

}  // namespace

DiffOperator DiffOperator::axis(Axis a, double weight) {
  if (!(weight >= 0.0)) throw Error("difference weight must be non-negative");
  return {Kind::AxisAligned, a, StripeDirection::vertical(), weight};
}

DiffOperator DiffOperator::oblique(StripeDirection theta) {
  // Axis-aligned angles route to the exact axis kernels.
  if (theta.is_vertical()) return {Kind::AxisAligned, Axis::Y, theta, 1.0};
  if (theta.is_horizontal()) return {Kind::AxisAligned, Axis::X, theta, 1.0};
  return {Kind::Oblique, Axis::Y, theta, 1.0};
}

void DiffOperator::apply(std::span<const double> in, std::span<double> out, const Dims& dims) const {
  check_len(in.size(), dims, "difference operator");
  check_len(out.size(), dims, "difference operator");
  if (kind_ == Kind::Oblique) {
    oblique_forward(in, out, dims, theta_);
  } else {
    axis_forward(in, out, dims, axis_, weight_);
  }
}

void DiffOperator::apply_adjoint(std::span<const double> p, std::span<double> out, const Dims& dims,
                                 bool accumulate) const {
  check_len(p.size(), dims, "adjoint difference");
  check_len(out.size(), dims, "adjoint difference");
  if (kind_ == Kind::Oblique) {
    oblique_transpose(p, out, dims, theta_, accumulate);
  } else {
    axis_adjoint(p, out, dims, axis_, weight_, accumulate);
  }
}

Volume DiffOperator::apply(const Volume& v) const {
  Volume out(v.dims());
  apply(v.values(), out.values(), v.dims());
  return out;
}

Volume DiffOperator::apply_adjoint(const Volume& p) const {
  Volume out(p.dims());
  apply_adjoint(p.values(), out.values(), p.dims());
  return out;
}

double DiffOperator::norm_bound(const Dims& dims) const noexcept {
  if (kind_ == Kind::AxisAligned) {
    const std::size_t n = axis_ == Axis::X ? dims.nx : axis_ == Axis::Y ? dims.ny : dims.nz;
    if (n < 2) return 0.0;
    return 2.0 * weight_;
  }
  return 2.0;
}

std::vector<Volume> StackedOperator::apply(const Volume& v) const {
  std::vector<Volume> out;
  out.reserve(channels_.size());
  for (const auto& op : channels_) out.push_back(op.apply(v));
  return out;
}

Volume StackedOperator::apply_adjoint(const std::vector<Volume>& p) const {
  if (p.size() != channels_.size()) throw Error("stacked adjoint: channel count mismatch");
  if (p.empty()) throw Error("stacked adjoint: no channels");
  Volume out(p.front().dims());
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    require_same_dims(p[c].dims(), out.dims(), "stacked adjoint");
    channels_[c].apply_adjoint(p[c].values(), out.values(), out.dims(), c > 0);
  }
  return out;
}

StackedOperator tv_operator(const Dims& dims, double rho_z) {
  if (!(rho_z >= 0.0 && rho_z <= 1.0)) throw Error("rho_z must lie in [0, 1]");
  StackedOperator op({DiffOperator::axis(Axis::X), DiffOperator::axis(Axis::Y)});
  if (!dims.is_2d()) op.push_back(DiffOperator::axis(Axis::Z, rho_z));
  return op;
}

double operator_norm_bound(const DiffOperator& op, const Dims& dims) { return op.norm_bound(dims); }

double operator_norm_bound(const StackedOperator& op, const Dims& dims) {
  double sq = 0.0;
  for (const auto& c : op.channels()) {
    const double b = c.norm_bound(dims);
    sq += b * b;
  }
  return std::sqrt(sq);
}

Volume forward_diff(const Volume& v, Axis axis) { return DiffOperator::axis(axis).apply(v); }

Volume adjoint_diff(const Volume& p, Axis axis) { return DiffOperator::axis(axis).apply_adjoint(p); }

Volume oblique_diff(const Volume& v, StripeDirection theta) {
  return DiffOperator::oblique(theta).apply(v);
}

Volume oblique_adjoint(const Volume& p, StripeDirection theta) {
  return DiffOperator::oblique(theta).apply_adjoint(p);
}

}  // namespace destripe
