#include "osc/analytic.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace osc {

namespace {

Mat2 make(double a00, double a01, double a10, double a11) {
  Mat2 m;
  m.a = {{{a00, a01}, {a10, a11}}};
  return m;
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  Mat2 r;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
  return r;
}

Mat2 operator+(const Mat2& x, const Mat2& y) {
  return make(x(0, 0) + y(0, 0), x(0, 1) + y(0, 1), x(1, 0) + y(1, 0), x(1, 1) + y(1, 1));
}

Mat2 operator-(const Mat2& x, const Mat2& y) {
  return make(x(0, 0) - y(0, 0), x(0, 1) - y(0, 1), x(1, 0) - y(1, 0), x(1, 1) - y(1, 1));
}

Mat2 operator*(double s, const Mat2& x) { return make(s * x(0, 0), s * x(0, 1), s * x(1, 0), s * x(1, 1)); }

Vec2 operator*(const Mat2& x, const Vec2& v) {
  return {x(0, 0) * v[0] + x(0, 1) * v[1], x(1, 0) * v[0] + x(1, 1) * v[1]};
}

Mat2 as_mat(const CovMatrix& v) { return make(v.v_xx, v.v_xp, v.v_xp, v.v_pp); }

double omega_f_squared(const ModelParams& p) { return (1.0 + p.d_omega_f) * (1.0 + p.d_omega_f); }

// Free evolution with H = (p^2 + w^2 x^2) / 2.
Mat2 oscillator_drift(double w2) { return make(0.0, 1.0, -w2, 0.0); }
Mat2 feedback(double k) { return make(0.0, 0.0, 0.0, -k); }

CovMatrix steady_cov(double alpha, double eta_eff, double w) {
  const double w2 = w * w;
  const double xm1 = xi_minus_one(4.0 * alpha * alpha * eta_eff / (w2 * w2));
  const double xi = 1.0 + xm1;
  const double root = std::sqrt(xm1);
  const double denom = 2.0 * std::numbers::sqrt2 * alpha * eta_eff;
  return {w * root / denom, w2 * xm1 / (4.0 * alpha * eta_eff), w2 * w * xi * root / denom};
}

}  // namespace

SteadyVariances steady_variances(const ModelParams& p) {
  return {steady_cov(p.alpha_f, p.eta_f * (1.0 + p.nu), 1.0 + p.d_omega_f), steady_cov(p.alpha_s, p.eta_s, 1.0)};
}

CovMatrix riccati_rhs(const CovMatrix& v, Side side, const ModelParams& p) {
  const bool f = side == Side::filter;
  const double w2 = f ? omega_f_squared(p) : 1.0;
  const double alpha = f ? p.alpha_f : p.alpha_s;
  const double c = f ? 4.0 * p.eta_f * (1.0 + p.nu) * alpha : 4.0 * p.eta_s * alpha;
  return {2.0 * v.v_xp - c * v.v_xx * v.v_xx,
          v.v_pp - w2 * v.v_xx - c * v.v_xx * v.v_xp,
          -2.0 * w2 * v.v_xp + alpha - c * v.v_xp * v.v_xp};
}

MomentSystem build_moment_system(const ModelParams& p, const CovMatrix& vf, const CovMatrix& vs) {
  const double bf = 4.0 * p.alpha_f * p.eta_f;
  const double bs = 4.0 * p.alpha_s * p.eta_s;
  const double bfs = 4.0 * std::sqrt(p.alpha_f * p.alpha_s * p.eta_f * p.eta_s);
  const double k = p.k;
  const double kt = p.k * p.tau;
  const double qf = bf * vf.v_xp + omega_f_squared(p);
  const double rfs = kt * bfs * vf.v_xp - 1.0;
  const double bfn = bf * (1.0 + p.nu);

  MomentSystem ms;
  auto& m = ms.m_inf;
  // d E[x_pi^2]
  m(0, 0) = -2.0 * bf * vf.v_xx;
  m(0, 1) = 2.0;
  m(0, 2) = 2.0 * bfs * vf.v_xx;
  // d E[x_pi p_pi]
  m(1, 0) = -qf;
  m(1, 1) = -(bf * vf.v_xx + k);
  m(1, 2) = bfs * vf.v_xp;
  m(1, 4) = 1.0;
  m(1, 5) = bfs * vf.v_xx;
  // d E[x_pi x_rho]
  m(2, 2) = -bf * vf.v_xx;
  m(2, 3) = 1.0;
  m(2, 5) = 1.0;
  m(2, 7) = bfs * vf.v_xx;
  // d E[x_pi p_rho]
  m(3, 0) = -kt * qf;
  m(3, 1) = -k * (1.0 + kt);
  m(3, 2) = rfs;
  m(3, 3) = -bf * vf.v_xx;
  m(3, 6) = 1.0;
  m(3, 8) = bfs * vf.v_xx;
  // d E[p_pi^2]
  m(4, 1) = -2.0 * qf;
  m(4, 4) = -2.0 * k;
  m(4, 5) = 2.0 * bfs * vf.v_xp;
  // d E[p_pi x_rho]
  m(5, 2) = -qf;
  m(5, 5) = -k;
  m(5, 6) = 1.0;
  m(5, 7) = bfs * vf.v_xp;
  // d E[p_pi p_rho]
  m(6, 1) = -kt * qf;
  m(6, 3) = -qf;
  m(6, 4) = -k * (1.0 + kt);
  m(6, 5) = rfs;
  m(6, 6) = -k;
  m(6, 8) = bfs * vf.v_xp;
  // d E[x_rho^2]
  m(7, 8) = 2.0;
  // d E[x_rho p_rho]
  m(8, 2) = -kt * qf;
  m(8, 5) = -k * (1.0 + kt);
  m(8, 7) = rfs;
  m(8, 9) = 1.0;
  // d E[p_rho^2]
  m(9, 3) = -2.0 * kt * qf;
  m(9, 6) = -2.0 * k * (1.0 + kt);
  m(9, 8) = 2.0 * rfs;

  auto& b = ms.b_inf;
  b[kXpiXpi] = bfn * vf.v_xx * vf.v_xx;
  b[kXpiPpi] = bfn * vf.v_xx * vf.v_xp;
  b[kXpiXrho] = bfs * vf.v_xx * vs.v_xx;
  b[kXpiPrho] = bfs * vf.v_xx * vs.v_xp + bfn * kt * vf.v_xx * vf.v_xp;
  b[kPpiPpi] = bfn * vf.v_xp * vf.v_xp;
  b[kPpiXrho] = bfs * vf.v_xp * vs.v_xx;
  b[kPpiPrho] = bfs * vf.v_xp * vs.v_xp + bfn * kt * vf.v_xp * vf.v_xp;
  b[kXrhoXrho] = bs * vs.v_xx * vs.v_xx;
  b[kXrhoPrho] = bs * vs.v_xx * vs.v_xp + bfs * kt * vs.v_xx * vf.v_xp;
  b[kPrhoPrho] = bs * vs.v_xp * vs.v_xp + 2.0 * bfs * kt * vs.v_xp * vf.v_xp + bfn * kt * kt * vf.v_xp * vf.v_xp;
  return ms;
}

MomentSystem build_moment_system(const ModelParams& params, const SteadyVariances& sv) {
  return build_moment_system(params, sv.filter, sv.system);
}

MomentVector stationary_moments(const MomentSystem& ms) {
  const auto x = linalg::solve(ms.m_inf, ms.b_inf);
  MomentVector v;
  for (std::size_t i = 0; i < kMomentCount; ++i) v[i] = -x[i];
  return v;
}

double steady_energy(const ModelParams& /*params*/, const SteadyVariances& sv, const MomentVector& v_inf) {
  return 0.5 * (v_inf[kXrhoXrho] + v_inf[kPrhoPrho]) + 0.5 * (sv.system.v_xx + sv.system.v_pp);
}

double e_inf_identical(double alpha, double eta, double k) {
  if (!(k > 0.0)) return std::numeric_limits<double>::infinity();
  const CovMatrix v = steady_cov(alpha, eta, 1.0);
  return alpha * eta * (2.0 * v.v_xx * v.v_xp + k * v.v_xx * v.v_xx + 1.0 / (2.0 * k * eta)) +
         0.5 * (v.v_xx + v.v_pp);
}

double rate_r0(double k) {
  const double disc = k * k - 4.0;
  return disc > 0.0 ? k + std::sqrt(disc) : k;
}

double rate_vars(const ModelParams& p, Side side) {
  const SteadyVariances sv = steady_variances(p);
  const bool f = side == Side::filter;
  const CovMatrix& v = f ? sv.filter : sv.system;
  const double w2 = f ? omega_f_squared(p) : 1.0;
  const double c = f ? 4.0 * p.eta_f * (1.0 + p.nu) * p.alpha_f : 4.0 * p.eta_s * p.alpha_s;
  // A~ = A - c V e1 e1^T
  const Mat2 at = make(-c * v.v_xx, 1.0, -w2 - c * v.v_xp, 0.0);
  const double half_trace = 0.5 * (at(0, 0) + at(1, 1));
  const std::complex<double> disc(half_trace * half_trace - at.det(), 0.0);
  const double re_plus = half_trace + std::sqrt(disc).real();
  return -2.0 * re_plus;
}

IdenticalCase IdenticalCase::from_filter(const ModelParams& p) { return {p.alpha_f, p.eta_f, p.k}; }

IdenticalCase IdenticalCase::from_system(const ModelParams& p) {
  return {p.alpha_s, p.eta_s, k_opt(p.alpha_s, p.eta_s, 0.0)};
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::marginal:
      return "marginal";
    case Stability::unstable:
      return "unstable";
  }
  return "unknown";
}

StabilityReport classify(const ModelParams& params, const IdenticalCase& baseline) {
  const SteadyVariances sv = steady_variances(params);
  MomentSystem ms = build_moment_system(params, sv);
  const auto spectrum = linalg::eigenvalues(ms.m_inf);

  StabilityReport r;
  r.max_re_lambda = spectrum.max_real();
  r.first_order_delay = params.tau > 0.0;
  r.e_inf_0 = baseline.energy();
  r.r0 = baseline.rate();
  if (std::abs(r.max_re_lambda) < kMarginalTolerance) {
    r.stability = Stability::marginal;
    return r;
  }
  if (r.max_re_lambda > 0.0) {
    r.stability = Stability::unstable;
    return r;
  }
  try {
    r.v_inf = stationary_moments(ms);
  } catch (const linalg::SingularMatrixError&) {
    r.stability = Stability::marginal;
    return r;
  }
  r.stability = Stability::stable;
  r.rate_r = -r.max_re_lambda;
  r.e_inf_rho = steady_energy(params, sv, *r.v_inf);
  r.energy_ratio = *r.e_inf_rho / r.e_inf_0;
  r.rate_ratio = r.r0 / *r.rate_r;
  return r;
}

StabilityReport classify(const ModelParams& params) { return classify(params, IdenticalCase::from_filter(params)); }

MeanCoefficients filter_means_matrices(const ModelParams& p, const CovMatrix& filter) {
  const Mat2 v = as_mat(filter);
  const Mat2 lpi_lpi = make(p.alpha_f, 0.0, 0.0, 0.0);
  const Mat2 lpi_lrho = make(std::sqrt(p.alpha_f * p.alpha_s), 0.0, 0.0, 0.0);
  const Vec2 lpi{std::sqrt(p.alpha_f), 0.0};

  MeanCoefficients c;
  c.filter_drift = oscillator_drift(omega_f_squared(p)) + feedback(p.k) - (4.0 * p.eta_f) * (v * lpi_lpi);
  c.system_drift = (4.0 * std::sqrt(p.eta_f * p.eta_s)) * (v * lpi_lrho);
  const Vec2 g = v * lpi;
  c.noise_w = {2.0 * std::sqrt(p.eta_f) * g[0], 2.0 * std::sqrt(p.eta_f) * g[1]};
  c.noise_cl = {2.0 * std::sqrt(p.eta_f * p.nu) * g[0], 2.0 * std::sqrt(p.eta_f * p.nu) * g[1]};
  return c;
}

MeanCoefficients delay_approx_means_matrices(const ModelParams& p, const SteadyVariances& sv) {
  const Mat2 vf = as_mat(sv.filter);
  const Mat2 vs = as_mat(sv.system);
  const Mat2 id = make(1.0, 0.0, 0.0, 1.0);
  const Mat2 kk = feedback(p.k);
  const Mat2 lpi_lpi = make(p.alpha_f, 0.0, 0.0, 0.0);
  const Mat2 lpi_lrho = make(std::sqrt(p.alpha_f * p.alpha_s), 0.0, 0.0, 0.0);
  const Vec2 lpi{std::sqrt(p.alpha_f), 0.0};
  const Vec2 lrho{std::sqrt(p.alpha_s), 0.0};
  const double tau = p.tau;

  MeanCoefficients c;
  c.filter_drift = kk * ((id - tau * kk) - tau * oscillator_drift(omega_f_squared(p)) +
                         (4.0 * p.eta_f * tau) * (vf * lpi_lpi));
  c.system_drift = oscillator_drift(1.0) - (4.0 * std::sqrt(p.eta_f * p.eta_s) * tau) * (kk * (vf * lpi_lrho));
  const Vec2 gs = vs * lrho;
  const Vec2 gf = (kk * vf) * lpi;
  for (std::size_t i = 0; i < 2; ++i) {
    c.noise_w[i] = 2.0 * (std::sqrt(p.eta_s) * gs[i] - std::sqrt(p.eta_f) * tau * gf[i]);
    c.noise_cl[i] = -2.0 * std::sqrt(p.eta_f * p.nu) * tau * gf[i];
  }
  return c;
}

ZeroMeanConditions zero_mean_conditions(const ModelParams& p, const SteadyVariances& sv) {
  ZeroMeanConditions z;
  z.det_m1 = filter_means_matrices(p, sv.filter).filter_drift.det();
  z.det_m4 = delay_approx_means_matrices(p, sv).system_drift.det();
  if (p.tau > 0.0) {
    const double excluded = 1.0 / (4.0 * p.tau * std::sqrt(p.alpha_f * p.alpha_s * p.eta_f * p.eta_s) * sv.filter.v_xp);
    z.degenerate_k = std::abs(p.k - excluded) <= 1e-9 * std::abs(excluded);
  }
  return z;
}

}  // namespace osc
