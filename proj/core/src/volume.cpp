#include "destripe/volume.hpp"

#include <algorithm>
#include <numeric>

namespace destripe {

std::string to_string(const Dims& d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

StripeDirection::StripeDirection(double radians) {
  if (!std::isfinite(radians)) throw Error("stripe direction must be finite");
  double t = std::fmod(radians, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t = 0.0;
  theta_ = t;
}

namespace {
constexpr double kSnap = 1e-12;
double snap(double v) { return std::abs(v) < kSnap ? 0.0 : v; }
}  // namespace

double StripeDirection::dx() const noexcept { return snap(std::cos(theta_)); }
double StripeDirection::dy() const noexcept { return snap(std::sin(theta_)); }

Volume::Volume(Dims dims, double fill) : dims_(dims) {
  if (!dims.valid()) throw Error("volume dims must be positive, got " + to_string(dims));
  data_.assign(dims.size(), fill);
}

Volume::Volume(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (!dims.valid()) throw Error("volume dims must be positive, got " + to_string(dims));
  if (data_.size() != dims.size()) {
    throw Error("volume data length " + std::to_string(data_.size()) + " does not match dims " +
                to_string(dims));
  }
}

Volume Volume::slice(std::size_t z) const {
  if (z >= dims_.nz) throw Error("slice index out of range");
  Dims d{dims_.nx, dims_.ny, 1};
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(z * d.size());
  return Volume(d, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(d.size())));
}

void Volume::set_slice(std::size_t z, const Volume& plane) {
  if (z >= dims_.nz) throw Error("slice index out of range");
  require_same_dims(plane.dims(), Dims{dims_.nx, dims_.ny, 1}, "set_slice");
  std::copy(plane.data_.begin(), plane.data_.end(),
            data_.begin() + static_cast<std::ptrdiff_t>(z * dims_.slice_size()));
}

double Volume::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Volume::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool Volume::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

StripeDecomposition StripeDecomposition::from_clean(const Volume& input, Volume clean) {
  require_same_dims(input.dims(), clean.dims(), "stripe decomposition");
  Volume stripes(input.dims());
  for (std::size_t i = 0; i < input.size(); ++i) stripes[i] = input[i] - clean[i];
  return {std::move(clean), std::move(stripes)};
}

Volume StripeDecomposition::reconstruct() const {
  Volume out(clean.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = clean[i] + stripes[i];
  return out;
}

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) {
    throw Error(std::string(what) + ": dims mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace destripe
