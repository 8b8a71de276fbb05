#include "destripe/prox.hpp"

#include "destripe/volume.hpp"

namespace destripe::prox {
namespace {

std::size_t group_size(std::span<const std::span<double>> channels) {
  if (channels.empty()) return 0;
  const std::size_t n = channels.front().size();
  for (const auto& c : channels) {
    if (c.size() != n) throw Error("group prox: channel lengths differ");
  }
  return n;
}

}  // namespace

void prox_l1(std::span<double> x, double lambda) {
  for (double& v : x) v = soft_threshold(v, lambda);
}

std::vector<double> prox_l1(std::span<const double> x, double lambda) {
  std::vector<double> out(x.begin(), x.end());
  prox_l1(std::span<double>(out), lambda);
  return out;
}

void project_box01(std::span<double> x) {
  for (double& v : x) v = clamp01(v);
}

std::vector<double> project_box01(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  project_box01(std::span<double>(out));
  return out;
}

void project_l2_ball_groups(std::span<const std::span<double>> channels, double radius) {
  if (!(radius > 0.0)) throw Error("l2 ball radius must be positive");
  const std::size_t n = group_size(channels);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (const auto& c : channels) sq += c[i] * c[i];
    const double norm = std::sqrt(sq);
    if (norm > radius) {
      const double s = radius / norm;
      for (const auto& c : channels) c[i] *= s;
    }
  }
}

void prox_conjugate_l1_shifted(std::span<double> y, double sigma, std::span<const double> shift) {
  if (shift.size() != y.size()) throw Error("shifted l1 prox: length mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = conjugate_l1_shifted(y[i], sigma, shift[i]);
}

void prox_huber(std::span<double> x, double lambda, double eps) {
  for (double& v : x) v = huber_prox(v, lambda, eps);
}

void prox_group_huber(std::span<const std::span<double>> channels, double lambda, double eps) {
  const std::size_t n = group_size(channels);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (const auto& c : channels) sq += c[i] * c[i];
    const double norm = std::sqrt(sq);
    if (norm == 0.0) continue;
    // The prox of a radial function acts on the magnitude only.
    const double s = huber_prox(norm, lambda, eps) / norm;
    for (const auto& c : channels) c[i] *= s;
  }
}

void prox_conjugate_group_huber_shifted(std::span<const std::span<double>> channels, double sigma,
                                        double eps, std::span<const std::span<const double>> shift) {
  const std::size_t n = group_size(channels);
  if (shift.size() != channels.size()) throw Error("group huber prox: shift channel count mismatch");
  const std::size_t m = channels.size();
  std::vector<double> g(m);
  for (std::size_t i = 0; i < n; ++i) {
    // Moreau: prox_{sigma F*}(y) = y - sigma prox_{F/sigma}(y / sigma), with
    // prox_{F/sigma}(w) = b - prox_{phi/sigma}(b - w).
    double sq = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      g[c] = shift[c][i] - channels[c][i] / sigma;
      sq += g[c] * g[c];
    }
    const double norm = std::sqrt(sq);
    const double s = norm == 0.0 ? 0.0 : huber_prox(norm, 1.0 / sigma, eps) / norm;
    for (std::size_t c = 0; c < m; ++c) {
      const double primal = shift[c][i] - s * g[c];
      channels[c][i] -= sigma * primal;
    }
  }
}

void prox_l1_toward_box01(std::span<double> x, double lambda, std::span<const double> center) {
  if (center.size() != x.size()) throw Error("l1 box prox: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = l1_toward_box01(x[i], lambda, center[i]);
}

}  // namespace destripe::prox
