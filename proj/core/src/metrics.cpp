#include "destripe/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "destripe/fft.hpp"

namespace destripe {

double mse(const Volume& u, const Volume& reference) {
  require_same_dims(u.dims(), reference.dims(), "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - reference[i];
    acc += d * d;
  }
  return acc / static_cast<double>(u.size());
}

double psnr(const Volume& u, const Volume& reference) {
  const double e = mse(u, reference);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(e);
}

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(kWindow / 2);
    g[i] = std::exp(-x * x / (2.0 * kWindowSigma * kWindowSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

/// Separable 'valid' Gaussian filtering of a 2D plane.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t nx, std::size_t ny) {
  static const auto taps = gaussian_taps();
  const std::size_t ox = nx - kWindow + 1;
  const std::size_t oy = ny - kWindow + 1;
  std::vector<double> rows(ox * ny);
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < ox; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) acc += taps[k] * img[x + k + nx * y];
      rows[x + ox * y] = acc;
    }
  }
  std::vector<double> out(ox * oy);
  for (std::size_t y = 0; y < oy; ++y) {
    for (std::size_t x = 0; x < ox; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) acc += taps[k] * rows[x + ox * (y + k)];
      out[x + ox * y] = acc;
    }
  }
  return out;
}

struct SsimTerms {
  double mean_ssim;  // mean of l * cs
  double mean_cs;
};

SsimTerms ssim_terms(const std::vector<double>& a, const std::vector<double>& b, std::size_t nx, std::size_t ny) {
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, nx, ny);
  const auto mu_b = filter_valid(b, nx, ny);
  const auto e_aa = filter_valid(aa, nx, ny);
  const auto e_bb = filter_valid(bb, nx, ny);
  const auto e_ab = filter_valid(ab, nx, ny);
  double sum_ssim = 0.0;
  double sum_cs = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double l = (2.0 * mu_a[i] * mu_b[i] + kC1) / (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1);
    const double cs = (2.0 * cov + kC2) / (var_a + var_b + kC2);
    sum_ssim += l * cs;
    sum_cs += cs;
  }
  const auto n = static_cast<double>(mu_a.size());
  return {sum_ssim / n, sum_cs / n};
}

/// 2x2 box average then decimation; odd trailing samples are replicated.
std::vector<double> downsample(const std::vector<double>& img, std::size_t nx, std::size_t ny, std::size_t& ox,
                               std::size_t& oy) {
  ox = (nx + 1) / 2;
  oy = (ny + 1) / 2;
  std::vector<double> out(ox * oy);
  for (std::size_t y = 0; y < oy; ++y) {
    const std::size_t y0 = 2 * y;
    const std::size_t y1 = std::min(y0 + 1, ny - 1);
    for (std::size_t x = 0; x < ox; ++x) {
      const std::size_t x0 = 2 * x;
      const std::size_t x1 = std::min(x0 + 1, nx - 1);
      out[x + ox * y] = 0.25 * (img[x0 + nx * y0] + img[x1 + nx * y0] + img[x0 + nx * y1] + img[x1 + nx * y1]);
    }
  }
  return out;
}

void require_window(const Dims& d, const char* what) {
  if (d.nx < kWindow || d.ny < kWindow) {
    throw Error(std::string(what) + ": image " + to_string(d) + " is smaller than the 11x11 window");
  }
}

MsSsimResult ms_ssim_plane(const Volume& a, const Volume& b, std::size_t max_levels) {
  const Dims d = a.dims();
  std::size_t levels = 1;
  while (levels < max_levels && std::min(d.nx, d.ny) >= (std::size_t{1} << levels) * kWindow) ++levels;

  MsSsimResult res;
  res.levels = levels;
  res.reduced_levels = levels < kMsSsimWeights.size();
  double wsum = 0.0;
  for (std::size_t j = 0; j < levels; ++j) wsum += kMsSsimWeights[j];

  std::vector<double> x = a.data();
  std::vector<double> y = b.data();
  std::size_t nx = d.nx;
  std::size_t ny = d.ny;
  double value = 1.0;
  for (std::size_t j = 0; j < levels; ++j) {
    const SsimTerms t = ssim_terms(x, y, nx, ny);
    const double w = kMsSsimWeights[j] / wsum;
    const double term = j + 1 == levels ? t.mean_ssim : t.mean_cs;
    value *= std::pow(std::max(term, 0.0), w);
    if (j + 1 < levels) {
      std::size_t ox = 0;
      std::size_t oy = 0;
      x = downsample(x, nx, ny, ox, oy);
      y = downsample(y, nx, ny, ox, oy);
      nx = ox;
      ny = oy;
    }
  }
  res.value = std::clamp(value, 0.0, 1.0);
  return res;
}

}  // namespace

double ssim(const Volume& u, const Volume& reference) {
  require_same_dims(u.dims(), reference.dims(), "ssim");
  if (!u.is_2d()) throw Error("ssim: expected a 2D image");
  require_window(u.dims(), "ssim");
  return ssim_terms(u.data(), reference.data(), u.dims().nx, u.dims().ny).mean_ssim;
}

MsSsimResult ms_ssim(const Volume& u, const Volume& reference, std::size_t max_levels) {
  require_same_dims(u.dims(), reference.dims(), "ms_ssim");
  require_window(u.dims(), "ms_ssim");
  if (max_levels == 0 || max_levels > kMsSsimWeights.size()) throw Error("ms_ssim: levels must be in [1, 5]");
  MsSsimResult total;
  double acc = 0.0;
  for (std::size_t z = 0; z < u.dims().nz; ++z) {
    const MsSsimResult r = ms_ssim_plane(u.slice(z), reference.slice(z), max_levels);
    acc += r.value;
    total.levels = r.levels;
    total.reduced_levels = r.reduced_levels;
  }
  total.value = acc / static_cast<double>(u.dims().nz);
  return total;
}

CurtainingResult curtaining(const Volume& u, const CurtainingParams& params) {
  if (!(params.band_halfwidth >= 0.0) || !(params.exclude_radius >= 0.0)) {
    throw Error("curtaining: band width and excluded radius must be non-negative");
  }
  const Dims d = u.dims();
  const Fft2D fft(d.nx, d.ny);
  const double cx = params.direction.dx();
  const double cy = params.direction.dy();

  CurtainingResult total{0.0, false};
  for (std::size_t z = 0; z < d.nz; ++z) {
    const Spectrum spec = fft.forward_real(u.slice(z).values());
    double band_sum = 0.0;
    double rest_sum = 0.0;
    std::size_t band_n = 0;
    std::size_t rest_n = 0;
    for (std::size_t iy = 0; iy < d.ny; ++iy) {
      const auto ky = static_cast<double>(signed_frequency(iy, d.ny));
      for (std::size_t ix = 0; ix < d.nx; ++ix) {
        const auto kx = static_cast<double>(signed_frequency(ix, d.nx));
        if (std::hypot(kx, ky) <= params.exclude_radius) continue;
        const double power = std::norm(spec[ix + d.nx * iy]);
        if (std::abs(kx * cx + ky * cy) <= params.band_halfwidth) {
          band_sum += power;
          ++band_n;
        } else {
          rest_sum += power;
          ++rest_n;
        }
      }
    }
    const double mean_band = band_n ? band_sum / static_cast<double>(band_n) : 0.0;
    const double mean_rest = rest_n ? rest_sum / static_cast<double>(rest_n) : 0.0;
    // Relative to the spectrum's own scale; roundoff-level power counts as none.
    const double scale = std::norm(spec[0]) + band_sum + rest_sum;
    double score = 1.0;
    if (mean_band + mean_rest <= 1e-24 * std::max(scale, 1.0)) {
      total.degenerate = true;
    } else {
      score = 1.0 - std::clamp((mean_band - mean_rest) / (mean_band + mean_rest), 0.0, 1.0);
    }
    total.score += score;
  }
  total.score /= static_cast<double>(d.nz);
  return total;
}

MetricReport evaluate(const Volume& u, const Volume* reference, const CurtainingParams& params) {
  MetricReport r;
  if (reference) {
    r.psnr = psnr(u, *reference);
    const MsSsimResult m = ms_ssim(u, *reference);
    r.ms_ssim = m.value;
    r.ms_ssim_levels = m.levels;
    r.ms_ssim_reduced = m.reduced_levels;
  }
  const CurtainingResult c = curtaining(u, params);
  r.curtaining = c.score;
  r.curtaining_degenerate = c.degenerate;
  return r;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_key_value(const MetricReport& r) {
  std::ostringstream os;
  os << "psnr=" << (r.psnr ? format_number(*r.psnr) : "unavailable") << '\n';
  os << "ms_ssim=" << (r.ms_ssim ? format_number(*r.ms_ssim) : "unavailable") << '\n';
  if (r.ms_ssim) {
    os << "ms_ssim_levels=" << r.ms_ssim_levels << '\n';
    os << "ms_ssim_reduced=" << (r.ms_ssim_reduced ? "true" : "false") << '\n';
  }
  os << "curtaining=" << format_number(r.curtaining) << '\n';
  os << "curtaining_degenerate=" << (r.curtaining_degenerate ? "true" : "false") << '\n';
  return os.str();
}

std::string csv_header() { return "psnr,ms_ssim,curtaining"; }

std::string to_csv_row(const MetricReport& r) {
  return (r.psnr ? format_number(*r.psnr) : std::string()) + "," +
         (r.ms_ssim ? format_number(*r.ms_ssim) : std::string()) + "," + format_number(r.curtaining);
}

}  // namespace destripe
