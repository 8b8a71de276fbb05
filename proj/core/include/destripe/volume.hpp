#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace destripe {

/// Raised for contract violations (bad dims, bad parameters, I/O failures).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  [[nodiscard]] constexpr std::size_t size() const noexcept { return nx * ny * nz; }
  [[nodiscard]] constexpr std::size_t slice_size() const noexcept { return nx * ny; }
  [[nodiscard]] constexpr bool is_2d() const noexcept { return nz == 1; }
  [[nodiscard]] constexpr bool valid() const noexcept { return nx >= 1 && ny >= 1 && nz >= 1; }

  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

enum class Axis { X, Y, Z };

/// In-plane stripe orientation. Stored in [0, pi); pi/2 is the y axis.
class StripeDirection {
 public:
  constexpr StripeDirection() = default;
  explicit StripeDirection(double radians);

  static StripeDirection vertical() { return StripeDirection(std::numbers::pi / 2); }
  static StripeDirection horizontal() { return StripeDirection(0.0); }

  [[nodiscard]] double radians() const noexcept { return theta_; }

  /// Unit step along the stripe, with components below 1e-12 snapped to
  /// zero so that axis-aligned angles give exact integer offsets.
  [[nodiscard]] double dx() const noexcept;
  [[nodiscard]] double dy() const noexcept;

  [[nodiscard]] bool is_vertical() const noexcept { return dx() == 0.0; }
  [[nodiscard]] bool is_horizontal() const noexcept { return dy() == 0.0; }

  friend bool operator==(const StripeDirection&, const StripeDirection&) = default;

 private:
  double theta_ = std::numbers::pi / 2;
};

/// Dense scalar field on a (nx, ny, nz) grid, x fastest then y then z.
/// Holds images (u0, u) as well as signed fields (stripes, gradients).
class Volume {
 public:
  Volume() = default;
  explicit Volume(Dims dims, double fill = 0.0);
  Volume(Dims dims, std::vector<double> data);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool is_2d() const noexcept { return dims_.is_2d(); }

  [[nodiscard]] std::size_t index(std::size_t x, std::size_t y, std::size_t z = 0) const noexcept {
    return x + dims_.nx * (y + dims_.ny * z);
  }

  double& operator()(std::size_t x, std::size_t y, std::size_t z = 0) noexcept {
    return data_[index(x, y, z)];
  }
  double operator()(std::size_t x, std::size_t y, std::size_t z = 0) const noexcept {
    return data_[index(x, y, z)];
  }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] std::span<double> values() noexcept { return data_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

  /// Copy of one x-y plane as a 2D volume.
  [[nodiscard]] Volume slice(std::size_t z) const;
  void set_slice(std::size_t z, const Volume& plane);

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims dims_{};
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

/// u0 = clean + stripes, with stripes defined as u0 - clean.
struct StripeDecomposition {
  Volume clean;
  Volume stripes;

  static StripeDecomposition from_clean(const Volume& input, Volume clean);
  [[nodiscard]] Volume reconstruct() const;
};

void require_same_dims(const Dims& a, const Dims& b, const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace destripe
