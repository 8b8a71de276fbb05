#include "destripe/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace destripe {
namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft2D::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Fft2D::Fft2D(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny), plans_(std::make_unique<Plans>()) {
  if (nx == 0 || ny == 0) throw Error("FFT dims must be positive");
  std::vector<std::complex<double>> scratch(nx * ny);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), buf, buf, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), buf, buf, FFTW_BACKWARD, flags);
  if (!plans_->forward || !plans_->backward) throw Error("FFTW planning failed");
}

Fft2D::~Fft2D() = default;
Fft2D::Fft2D(Fft2D&&) noexcept = default;
Fft2D& Fft2D::operator=(Fft2D&&) noexcept = default;

void Fft2D::forward(std::span<std::complex<double>> data) const {
  if (data.size() != nx_ * ny_) throw Error("FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, buf, buf);
}

void Fft2D::inverse(std::span<std::complex<double>> data) const {
  if (data.size() != nx_ * ny_) throw Error("FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->backward, buf, buf);
  const double scale = 1.0 / static_cast<double>(nx_ * ny_);
  for (auto& c : data) c *= scale;
}

Spectrum Fft2D::forward_real(std::span<const double> plane) const {
  if (plane.size() != nx_ * ny_) throw Error("FFT input size mismatch");
  Spectrum out(plane.begin(), plane.end());
  forward(out);
  return out;
}

}  // namespace destripe
