#include "destripe/vsnr.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "destripe/diffops.hpp"
#include "destripe/fft.hpp"
#include "destripe/prox.hpp"

namespace destripe {

void VsnrParams::validate(std::size_t pattern_count) const {
  if (pattern_count == 0) throw Error("vsnr: at least one pattern is required");
  if (alphas.size() != pattern_count) throw Error("vsnr: need one alpha per pattern");
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error("vsnr: alphas must be positive");
  }
  if (!(epsilon > 0.0)) throw Error("vsnr: epsilon must be positive");
  if (!(extrapolation >= 0.0 && extrapolation <= 1.0)) throw Error("vsnr: extrapolation must lie in [0, 1]");
}

namespace {

void require_2d(const Volume& v, const char* what) {
  if (!v.is_2d()) throw Error(std::string(what) + ": input must be 2D (apply slice-wise)");
}

/// Kernel wrapped onto an nx-by-ny torus with its centre at the origin.
Spectrum kernel_spectrum(const Volume& kernel, const Fft2D& fft) {
  const std::size_t nx = fft.nx();
  const std::size_t ny = fft.ny();
  Spectrum buf(nx * ny, 0.0);
  const long cx = static_cast<long>(kernel.dims().nx / 2);
  const long cy = static_cast<long>(kernel.dims().ny / 2);
  for (std::size_t j = 0; j < kernel.dims().ny; ++j) {
    const long oy = static_cast<long>(j) - cy;
    const auto y = static_cast<std::size_t>(((oy % static_cast<long>(ny)) + static_cast<long>(ny)) % static_cast<long>(ny));
    for (std::size_t i = 0; i < kernel.dims().nx; ++i) {
      const long ox = static_cast<long>(i) - cx;
      const auto x = static_cast<std::size_t>(((ox % static_cast<long>(nx)) + static_cast<long>(nx)) % static_cast<long>(nx));
      buf[x + nx * y] += kernel(i, j);
    }
  }
  fft.forward(buf);
  return buf;
}

const StackedOperator& gradient_2d() {
  static const StackedOperator op({DiffOperator::axis(Axis::X), DiffOperator::axis(Axis::Y)});
  return op;
}

double huber_tv(std::span<const double> u, const Dims& d, double eps) {
  const auto g = gradient_2d().apply(Volume(d, std::vector<double>(u.begin(), u.end())));
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) total += prox::huber(std::hypot(g[0][i], g[1][i]), eps);
  return total;
}

}  // namespace

Volume convolve_periodic(const Volume& image, const Volume& kernel) {
  require_2d(image, "convolve_periodic");
  const Dims d = image.dims();
  const Fft2D fft(d.nx, d.ny);
  const Spectrum k = kernel_spectrum(kernel, fft);
  Spectrum buf = fft.forward_real(image.values());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= k[i];
  fft.inverse(buf);
  Volume out(d);
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
  return out;
}

Volume synthesize_stripes(const std::vector<Volume>& weights, const std::vector<GaborPattern>& patterns) {
  if (weights.size() != patterns.size() || weights.empty()) throw Error("synthesize_stripes: count mismatch");
  Volume s(weights.front().dims());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Volume c = convolve_periodic(weights[i], patterns[i].kernel);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += c[k];
  }
  return s;
}

double vsnr_objective(const Volume& u0, const std::vector<Volume>& weights,
                      const std::vector<GaborPattern>& patterns, const VsnrParams& params) {
  params.validate(patterns.size());
  require_2d(u0, "vsnr_objective");
  double reg = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require_same_dims(weights[i].dims(), u0.dims(), "vsnr_objective");
    for (double v : weights[i].values()) {
      if (std::abs(v) > 1.0) return std::numeric_limits<double>::infinity();
      reg += params.alphas[i] * std::abs(v);
    }
  }
  const Volume s = synthesize_stripes(weights, patterns);
  std::vector<double> u(u0.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = u0[k] - s[k];
  return huber_tv(u, u0.dims(), params.epsilon) + reg;
}

VsnrResult solve_vsnr(const Volume& u0, const std::vector<GaborPattern>& patterns, const VsnrParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  params.validate(patterns.size());
  require_2d(u0, "solve_vsnr");
  if (!u0.all_finite()) throw Error("solve_vsnr: input contains NaN or infinity");

  const Dims d = u0.dims();
  const std::size_t n = d.size();
  const std::size_t m = patterns.size();
  const Fft2D fft(d.nx, d.ny);
  const auto& grad = gradient_2d();

  std::vector<Spectrum> psi;
  psi.reserve(m);
  for (const auto& p : patterns) psi.push_back(kernel_spectrum(p.kernel, fft));

  // |K| <= |grad| * |C| with |C|^2 = max over frequencies of sum_i |psi_i|^2.
  double c_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (const auto& s : psi) acc += std::norm(s[k]);
    c_sq = std::max(c_sq, acc);
  }
  const double norm = operator_norm_bound(grad, d) * std::sqrt(c_sq);
  const double default_step = norm > 0.0 ? 0.99 / norm : 1.0;
  const double tau = params.tau.value_or(default_step);
  const double sigma = params.sigma.value_or(default_step);
  if (!(tau > 0.0) || !(sigma > 0.0)) throw Error("vsnr: steps must be positive");
  if (tau * sigma * norm * norm > 1.0) throw Error("vsnr: steps violate tau * sigma * L^2 <= 1");

  VsnrResult result;
  auto& report = result.report;
  report.tau = tau;
  report.sigma = sigma;
  report.operator_norm = norm;

  std::vector<std::vector<double>> lambda(m, std::vector<double>(n, 0.0));
  std::vector<double> s(n, 0.0);
  std::vector<double> ktp(n);
  std::vector<double> delta(n);
  Spectrum g_hat(n);
  Spectrum work(n);
  Spectrum s_hat(n);

  const auto b = grad.apply(u0);
  std::vector<std::vector<double>> y(2, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> ybar(2, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> y_old(2, std::vector<double>(n, 0.0));
  std::vector<std::span<double>> y_spans(y.begin(), y.end());
  std::vector<std::span<const double>> b_spans{b[0].values(), b[1].values()};

  auto weight_volumes = [&] {
    std::vector<Volume> w;
    for (const auto& l : lambda) w.emplace_back(d, l);
    return w;
  };
  auto objective = [&](std::span<const double> stripes) {
    double reg = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (double v : lambda[i]) reg += params.alphas[i] * std::abs(v);
    }
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = u0[k] - stripes[k];
    return huber_tv(u, d, params.epsilon) + reg;
  };

  report.initial_objective = objective(s);
  report.objective_trace.emplace_back(0, report.initial_objective);

  std::size_t k = 0;
  while (k < params.max_iters) {
    ++k;
    // K^T ybar = (psi_i correlated with grad^T ybar)_i
    grad.channels()[0].apply_adjoint(ybar[0], ktp, d, false);
    grad.channels()[1].apply_adjoint(ybar[1], ktp, d, true);
    for (std::size_t q = 0; q < n; ++q) g_hat[q] = ktp[q];
    fft.forward(g_hat);

    double change = 0.0;
    double ref = 0.0;
    std::fill(s_hat.begin(), s_hat.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t q = 0; q < n; ++q) work[q] = std::conj(psi[i][q]) * g_hat[q];
      fft.inverse(work);
      auto& l = lambda[i];
      const double thr = tau * params.alphas[i];
      for (std::size_t q = 0; q < n; ++q) {
        const double prev = l[q];
        l[q] = std::clamp(prox::soft_threshold(prev - tau * work[q].real(), thr), -1.0, 1.0);
        change += (l[q] - prev) * (l[q] - prev);
        ref += prev * prev;
        work[q] = l[q];
      }
      fft.forward(work);
      for (std::size_t q = 0; q < n; ++q) s_hat[q] += psi[i][q] * work[q];
    }
    fft.inverse(s_hat);
    for (std::size_t q = 0; q < n; ++q) s[q] = s_hat[q].real();

    // Dual ascent on grad s, then the conjugate prox of the shifted Huber-TV.
    for (std::size_t c = 0; c < 2; ++c) {
      grad.channels()[c].apply(s, delta, d);
      for (std::size_t q = 0; q < n; ++q) {
        y_old[c][q] = y[c][q];
        y[c][q] += sigma * delta[q];
      }
    }
    prox::prox_conjugate_group_huber_shifted(y_spans, sigma, params.epsilon, b_spans);
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t q = 0; q < n; ++q) {
        ybar[c][q] = y[c][q] + params.extrapolation * (y[c][q] - y_old[c][q]);
      }
    }

    if (params.log_stride > 0 && k % params.log_stride == 0 && k < params.max_iters) {
      report.objective_trace.emplace_back(k, objective(s));
    }
    if (params.tolerance > 0.0) {
      const double rel = ref > 0.0 ? std::sqrt(change / ref) : std::sqrt(change);
      if (k > 1 && rel < params.tolerance) {
        report.stopped_early = true;
        break;
      }
    }
  }

  report.iterations = k;
  report.final_objective = objective(s);
  if (report.final_objective > report.initial_objective) {
    for (auto& l : lambda) std::fill(l.begin(), l.end(), 0.0);
    std::fill(s.begin(), s.end(), 0.0);
    report.final_objective = report.initial_objective;
    report.fell_back_to_input = true;
  }
  if (report.objective_trace.back().first != k) report.objective_trace.emplace_back(k, report.final_objective);

  Volume clean(d);
  for (std::size_t q = 0; q < n; ++q) clean[q] = u0[q] - s[q];
  result.decomposition = StripeDecomposition{std::move(clean), Volume(d, s)};
  result.weights = weight_volumes();
  report.constraint_residual = max_abs_diff(result.decomposition.reconstruct().values(), u0.values());
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace destripe
