#include "destripe/fourier_filter.hpp"

#include <cmath>
#include <numbers>

#include "destripe/fft.hpp"
#include "destripe/parallel.hpp"

namespace destripe {
namespace {

constexpr double kPi = std::numbers::pi;

double angular_deviation(double a, double b) { return std::remainder(a - b, kPi); }

bool is_damped(double theta_i, const FourierFilterParams& p) {
  return std::abs(angular_deviation(theta_i, p.direction.radians())) <= kPi / 4.0 + 1e-12;
}

struct Bin {
  double kx;
  double ky;
};

Bin bin_at(std::size_t ix, std::size_t iy, const Dims& d) {
  return {static_cast<double>(signed_frequency(ix, d.nx)), static_cast<double>(signed_frequency(iy, d.ny))};
}

bool protected_bin(const Bin& b, const FourierFilterParams& p) {
  return std::hypot(b.kx, b.ky) <= p.protect_radius;
}

double band_distance(const Bin& b, const FourierFilterParams& p) {
  return std::abs(b.kx * p.direction.dx() + b.ky * p.direction.dy());
}

double notch(double distance, double sigma_i) {
  if (sigma_i == 0.0) return distance == 0.0 ? 0.0 : 1.0;
  return 1.0 - std::exp(-(distance * distance) / (2.0 * sigma_i * sigma_i));
}

double combined_value(const Bin& b, const FourierFilterParams& p) {
  if (protected_bin(b, p)) return 1.0;
  // Spectral energy along phi belongs to structures oriented along phi + pi/2.
  const double orientation = std::atan2(b.ky, b.kx) + kPi / 2.0;
  const double spacing = kPi / static_cast<double>(p.n_dir);
  const double half_width = p.wedge_smoothing * spacing;
  const double d = band_distance(b, p);
  double weight_sum = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.n_dir; ++i) {
    const double theta_i = wedge_angle(i, p);
    const double delta = std::abs(angular_deviation(orientation, theta_i));
    if (delta >= half_width) continue;
    const double c = std::cos(kPi * delta / (2.0 * half_width));
    const double w = c * c;
    weight_sum += w;
    acc += w * (is_damped(theta_i, p) ? notch(d, wedge_sigma(theta_i, p)) : 1.0);
  }
  return weight_sum > 0.0 ? acc / weight_sum : 1.0;
}

}  // namespace

void FourierFilterParams::validate() const {
  if (!(sigma > 0.0)) throw Error("fourier filter: sigma must be positive");
  if (!(sigma_a > 0.0)) throw Error("fourier filter: sigma_a must be positive");
  if (n_dir < 2) throw Error("fourier filter: n_dir must be at least 2");
  if (!(protect_radius >= 0.0)) throw Error("fourier filter: protect radius must be non-negative");
  if (!(wedge_smoothing > 0.5)) throw Error("fourier filter: wedge smoothing must exceed 0.5");
}

double wedge_angle(std::size_t i, const FourierFilterParams& params) {
  const double t = params.direction.radians() + kPi * static_cast<double>(i) / static_cast<double>(params.n_dir);
  return std::fmod(t, kPi);
}

double wedge_sigma(double theta_i, const FourierFilterParams& params) {
  const double dev = angular_deviation(params.direction.radians(), theta_i);
  return params.sigma * std::exp(-(dev * dev) / (2.0 * params.sigma_a * params.sigma_a));
}

Volume damping_mask(const Dims& dims, double theta_i, const FourierFilterParams& params) {
  params.validate();
  const Dims plane{dims.nx, dims.ny, 1};
  Volume mask(plane, 1.0);
  if (!is_damped(theta_i, params)) return mask;
  const double sigma_i = wedge_sigma(theta_i, params);
  for (std::size_t iy = 0; iy < plane.ny; ++iy) {
    for (std::size_t ix = 0; ix < plane.nx; ++ix) {
      const Bin b = bin_at(ix, iy, plane);
      if (!protected_bin(b, params)) mask(ix, iy) = notch(band_distance(b, params), sigma_i);
    }
  }
  return mask;
}

Volume combined_mask(const Dims& dims, const FourierFilterParams& params) {
  params.validate();
  const Dims plane{dims.nx, dims.ny, 1};
  Volume raw(plane);
  for (std::size_t iy = 0; iy < plane.ny; ++iy) {
    for (std::size_t ix = 0; ix < plane.nx; ++ix) raw(ix, iy) = combined_value(bin_at(ix, iy, plane), params);
  }
  // Average with the mirrored bin; Nyquist rows and columns otherwise break k -> -k symmetry.
  Volume mask(plane);
  for (std::size_t iy = 0; iy < plane.ny; ++iy) {
    const std::size_t my = (plane.ny - iy) % plane.ny;
    for (std::size_t ix = 0; ix < plane.nx; ++ix) {
      const std::size_t mx = (plane.nx - ix) % plane.nx;
      mask(ix, iy) = 0.5 * (raw(ix, iy) + raw(mx, my));
    }
  }
  return mask;
}

namespace {

Volume apply_mask(const Volume& slice, const Volume& mask, const Fft2D& fft, double& residue) {
  Spectrum spec = fft.forward_real(slice.values());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= mask[i];
  fft.inverse(spec);
  Volume out(slice.dims());
  residue = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out[i] = spec[i].real();
    residue = std::max(residue, std::abs(spec[i].imag()));
  }
  return out;
}

}  // namespace

Volume filter_slice(const Volume& slice, const FourierFilterParams& params, FilterReport* report) {
  if (!slice.is_2d()) throw Error("filter_slice: expected a 2D slice");
  const Volume mask = combined_mask(slice.dims(), params);
  const Fft2D fft(slice.dims().nx, slice.dims().ny);
  double residue = 0.0;
  Volume out = apply_mask(slice, mask, fft, residue);
  if (report) report->max_imag_residue = residue;
  return out;
}

StripeDecomposition filter_volume(const Volume& v, const FourierFilterParams& params, FilterReport* report) {
  const Dims d = v.dims();
  const Volume mask = combined_mask(d, params);
  const Fft2D fft(d.nx, d.ny);
  Volume out(d);
  std::vector<double> residues(d.nz, 0.0);
  parallel_for(d.nz, [&](std::size_t z) {
    const Volume filtered = apply_mask(v.slice(z), mask, fft, residues[z]);
    std::copy(filtered.values().begin(), filtered.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(z * d.slice_size()));
  });
  if (report) report->max_imag_residue = *std::max_element(residues.begin(), residues.end());
  return StripeDecomposition::from_clean(v, std::move(out));
}

}  // namespace destripe
