#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "destripe/volume.hpp"

namespace destripe {

using Spectrum = std::vector<std::complex<double>>;

/// Complex 2D DFT on an nx-by-ny grid (x fastest), backed by FFTW.
/// Plans are created once; execution is reentrant.
class Fft2D {
 public:
  Fft2D(std::size_t nx, std::size_t ny);
  ~Fft2D();
  Fft2D(Fft2D&&) noexcept;
  Fft2D& operator=(Fft2D&&) noexcept;
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
  [[nodiscard]] std::size_t ny() const noexcept { return ny_; }

  void forward(std::span<std::complex<double>> data) const;
  /// Unnormalized inverse followed by division by nx * ny.
  void inverse(std::span<std::complex<double>> data) const;

  [[nodiscard]] Spectrum forward_real(std::span<const double> plane) const;

 private:
  struct Plans;
  std::size_t nx_;
  std::size_t ny_;
  std::unique_ptr<Plans> plans_;
};

/// Signed frequency index of bin k on an n-point axis (k for k < n/2, k - n otherwise;
/// the Nyquist bin of an even axis maps to -n/2).
inline long signed_frequency(std::size_t k, std::size_t n) noexcept {
  const long kk = static_cast<long>(k);
  const long nn = static_cast<long>(n);
  return 2 * kk < nn ? kk : kk - nn;
}

}  // namespace destripe
