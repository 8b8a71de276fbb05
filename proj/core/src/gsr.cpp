#include "destripe/gsr.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "destripe/prox.hpp"

namespace destripe {

void GsrParams::validate() const {
  if (!(mu1 > 0.0) || !std::isfinite(mu1)) throw Error("mu1 must be positive");
  if (!(mu2 > 0.0) || !std::isfinite(mu2)) throw Error("mu2 must be positive");
  if (!(rho_z >= 0.0 && rho_z <= 1.0)) throw Error("rho_z must lie in [0, 1]");
  if (directions.empty()) throw Error("at least one stripe direction is required");
}

StackedOperator gsr_tv_operator(const Dims& dims, const GsrParams& params) {
  if (params.dimensionality == Dimensionality::TwoD) return tv_operator(Dims{dims.nx, dims.ny, 1}, 1.0);
  return tv_operator(dims, params.rho_z);
}

namespace {

StackedOperator stripe_operator(const GsrParams& params) {
  StackedOperator op;
  for (const auto& theta : params.directions) op.push_back(DiffOperator::oblique(theta));
  return op;
}

bool inside_box(std::span<const double> u) {
  for (double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

double tv_value(const StackedOperator& tv, std::span<const double> u, const Dims& d) {
  std::vector<std::vector<double>> g(tv.size(), std::vector<double>(d.size()));
  for (std::size_t c = 0; c < tv.size(); ++c) tv.channels()[c].apply(u, g[c], d);
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double sq = 0.0;
    for (const auto& gc : g) sq += gc[i] * gc[i];
    total += std::sqrt(sq);
  }
  return total;
}

double objective_value(const StackedOperator& tv, const StackedOperator& stripe, double mu1, double mu2,
                       std::span<const double> u0, std::span<const double> u, const Dims& d) {
  if (!inside_box(u)) return std::numeric_limits<double>::infinity();
  std::vector<double> s(d.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u0[i] - u[i];
    l1 += std::abs(s[i]);
  }
  double directional = 0.0;
  std::vector<double> ds(d.size());
  for (const auto& op : stripe.channels()) {
    op.apply(s, ds, d);
    for (double v : ds) directional += std::abs(v);
  }
  return mu1 * tv_value(tv, u, d) + directional + mu2 * l1;
}

}  // namespace

double gsr_objective(const Volume& u0, const Volume& u, const GsrParams& params) {
  params.validate();
  require_same_dims(u0.dims(), u.dims(), "gsr_objective");
  return objective_value(gsr_tv_operator(u0.dims(), params), stripe_operator(params), params.mu1,
                         params.mu2, u0.values(), u.values(), u0.dims());
}

GsrSolver::GsrSolver(const Volume& u0, GsrParams params, SolverSettings settings)
    : u0_(u0), params_(std::move(params)), settings_(settings) {
  params_.validate();
  if (!u0_.all_finite()) throw Error("solve_gsr: input contains NaN or infinity");
  tv_ = gsr_tv_operator(u0_.dims(), params_);
  stripe_ = stripe_operator(params_);

  double sq = 0.0;
  for (const auto* op : {&tv_, &stripe_}) {
    const double b = operator_norm_bound(*op, u0_.dims());
    sq += b * b;
  }
  norm_ = std::sqrt(sq);
  // A 1x1 image has no differences at all; any step is stable.
  const double default_step = norm_ > 0.0 ? 0.99 / norm_ : 1.0;
  tau_ = settings_.tau.value_or(default_step);
  sigma_ = settings_.sigma.value_or(default_step);
  if (!(tau_ > 0.0) || !(sigma_ > 0.0)) throw Error("solver steps must be positive");
  if (tau_ * sigma_ * norm_ * norm_ > 1.0) {
    throw Error("solver steps violate tau * sigma * L^2 <= 1 (L = " + std::to_string(norm_) + ")");
  }
  if (!(settings_.extrapolation >= 0.0 && settings_.extrapolation <= 1.0)) {
    throw Error("extrapolation weight must lie in [0, 1]");
  }
  if (settings_.tolerance < 0.0) throw Error("tolerance must be non-negative");
}

std::pair<StripeDecomposition, SolveReport> GsrSolver::run() const {
  const auto t0 = std::chrono::steady_clock::now();
  const Dims d = u0_.dims();
  const std::size_t n = d.size();
  const auto u0 = u0_.values();
  const double mu1 = params_.mu1;
  const double mu2 = params_.mu2;
  const double theta = settings_.extrapolation;

  SolveReport report;
  report.tau = tau_;
  report.sigma = sigma_;
  report.operator_norm = norm_;

  std::vector<double> u(u0.begin(), u0.end());
  std::vector<double> u_prev(n);
  std::vector<double> ktp(n);
  std::vector<double> ku(n);

  const std::size_t m_tv = tv_.size();
  const std::size_t m_s = stripe_.size();
  std::vector<std::vector<double>> p_tv(m_tv, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> bar_tv(m_tv, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> p_s(m_s, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> bar_s(m_s, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> shift(m_s, std::vector<double>(n));
  for (std::size_t c = 0; c < m_s; ++c) stripe_.channels()[c].apply(u0, shift[c], d);

  std::vector<std::span<double>> tv_spans(p_tv.begin(), p_tv.end());

  auto objective = [&](std::span<const double> x) {
    return objective_value(tv_, stripe_, mu1, mu2, u0, x, d);
  };
  report.initial_objective = objective(u);
  report.objective_trace.emplace_back(0, report.initial_objective);

  const double tau_mu2 = tau_ * mu2;
  std::size_t k = 0;
  while (k < settings_.max_iters) {
    ++k;
    // Primal step: u <- prox_{tau G}(u - tau K^T pbar).
    bool first = true;
    for (std::size_t c = 0; c < m_tv; ++c, first = false) {
      tv_.channels()[c].apply_adjoint(bar_tv[c], ktp, d, !first);
    }
    for (std::size_t c = 0; c < m_s; ++c, first = false) {
      stripe_.channels()[c].apply_adjoint(bar_s[c], ktp, d, !first);
    }
    u_prev.swap(u);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = prox::l1_toward_box01(u_prev[i] - tau_ * ktp[i], tau_mu2, u0[i]);
    }

    // Dual step on the TV channels: ascent, then projection onto the mu1 ball.
    for (std::size_t c = 0; c < m_tv; ++c) {
      tv_.channels()[c].apply(u, ku, d);
      auto& p = p_tv[c];
      auto& bar = bar_tv[c];
      for (std::size_t i = 0; i < n; ++i) {
        bar[i] = p[i];
        p[i] += sigma_ * ku[i];
      }
    }
    prox::project_l2_ball_groups(tv_spans, mu1);
    for (std::size_t c = 0; c < m_tv; ++c) {
      auto& p = p_tv[c];
      auto& bar = bar_tv[c];
      for (std::size_t i = 0; i < n; ++i) bar[i] = p[i] + theta * (p[i] - bar[i]);
    }

    // Dual step on the directional channels (conjugate of |b - z|_1).
    for (std::size_t c = 0; c < m_s; ++c) {
      stripe_.channels()[c].apply(u, ku, d);
      auto& p = p_s[c];
      auto& bar = bar_s[c];
      const auto& b = shift[c];
      for (std::size_t i = 0; i < n; ++i) {
        const double old = p[i];
        p[i] = prox::conjugate_l1_shifted(old + sigma_ * ku[i], sigma_, b[i]);
        bar[i] = p[i] + theta * (p[i] - old);
      }
    }

    if (settings_.log_stride > 0 && k % settings_.log_stride == 0 && k < settings_.max_iters) {
      report.objective_trace.emplace_back(k, objective(u));
    }
    if (settings_.tolerance > 0.0) {
      double diff = 0.0;
      double ref = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        diff += (u[i] - u_prev[i]) * (u[i] - u_prev[i]);
        ref += u_prev[i] * u_prev[i];
      }
      const double rel = ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
      if (rel < settings_.tolerance) {
        report.stopped_early = true;
        break;
      }
    }
  }

  report.iterations = k;
  report.final_objective = objective(u);
  if (report.final_objective > report.initial_objective) {
    u.assign(u0.begin(), u0.end());
    report.final_objective = report.initial_objective;
    report.fell_back_to_input = true;
  }
  if (report.objective_trace.back().first != k) report.objective_trace.emplace_back(k, report.final_objective);

  auto result = StripeDecomposition::from_clean(u0_, Volume(d, std::move(u)));
  report.constraint_residual = max_abs_diff(result.reconstruct().values(), u0);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(result), std::move(report)};
}

std::pair<StripeDecomposition, SolveReport> solve_gsr(const Volume& u0, const GsrParams& params,
                                                      const SolverSettings& settings) {
  return GsrSolver(u0, params, settings).run();
}

std::pair<StripeDecomposition, SolveReport> solve_gsr_oblique(const Volume& u0, const GsrParams& params,
                                                              const SolverSettings& settings) {
  return GsrSolver(u0, params, settings).run();
}

}  // namespace destripe
