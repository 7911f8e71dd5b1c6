#pragma once

// Closed-form and linear-algebraic results for the Gaussian moment reduction:
// steady-state conditional variances, the ten-moment linear system for the
// means, steady energy, stability and convergence rates.

#include <array>
#include <optional>
#include <string>

#include "osc/core.hpp"
#include "osc/linalg.hpp"

namespace osc {

enum class Side { filter, system };

/// Index of each ensemble second moment in the ten-vector v. Order is fixed
/// and shared by every module: pi = filter mean, rho = system mean.
enum MomentIndex : std::size_t {
  kXpiXpi = 0,
  kXpiPpi = 1,
  kXpiXrho = 2,
  kXpiPrho = 3,
  kPpiPpi = 4,
  kPpiXrho = 5,
  kPpiPrho = 6,
  kXrhoXrho = 7,
  kXrhoPrho = 8,
  kPrhoPrho = 9,
};
inline constexpr std::size_t kMomentCount = 10;
using MomentVector = std::array<double, kMomentCount>;

/// Pairs (i, j) of mean components (x_pi, p_pi, x_rho, p_rho) for each
/// MomentIndex entry.
inline constexpr std::array<std::array<std::size_t, 2>, kMomentCount> kMomentPairs{{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

struct Mat2 {
  std::array<std::array<double, 2>, 2> a{};
  double operator()(std::size_t i, std::size_t j) const { return a[i][j]; }
  double& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
  double det() const { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }
};
using Vec2 = std::array<double, 2>;

struct SteadyVariances {
  CovMatrix filter;
  CovMatrix system;
};

/// Stationary solutions of the filter and system Riccati equations.
SteadyVariances steady_variances(const ModelParams& params);

/// Right-hand side A V + V A^T + D - 4 eta (1 + nu_eff) V L L^T V of the
/// Riccati equation for one side. The filter uses its own (mis)calibrated
/// trap frequency and nu_eff = nu; the system uses nu_eff = 0.
CovMatrix riccati_rhs(const CovMatrix& v, Side side, const ModelParams& params);

/// Drift matrix and constant vector of dv/dt = M v + b for the ensemble
/// second moments of the means, with the delay taken to first order.
struct MomentSystem {
  linalg::SquareMatrix m_inf{10};
  MomentVector b_inf{};
  std::optional<MomentVector> v_inf;
};

/// Assembles M and b for the given conditional variances (steady-state
/// values give M_inf and b_inf). v_inf is left empty.
MomentSystem build_moment_system(const ModelParams& params, const CovMatrix& filter, const CovMatrix& system);
MomentSystem build_moment_system(const ModelParams& params, const SteadyVariances& sv);

/// v_inf = -M_inf^-1 b_inf. Throws linalg::SingularMatrixError.
MomentVector stationary_moments(const MomentSystem& ms);

/// Average steady energy of the system: half the mean-square of its
/// conditional means plus half its conditional variances.
double steady_energy(const ModelParams& params, const SteadyVariances& sv, const MomentVector& v_inf);

/// Steady energy when filter and system are identical (no noise, no delay).
double e_inf_identical(double alpha, double eta, double k);

/// Identical-case long-time convergence rate Re{k + sqrt(k^2 - 4)}.
double rate_r0(double k);

/// Decay rate of the conditional-variance transient, -2 Re(lambda_+) of the
/// linearised Riccati drift. Always positive.
double rate_vars(const ModelParams& params, Side side);

/// The identical-filter reference against which a separated configuration is
/// judged: steady energy and convergence rate for (alpha, eta, k).
struct IdenticalCase {
  double alpha = 0.0;
  double eta = 0.0;
  double k = 0.0;

  /// alpha_F, eta_F and the configuration's own k (the experimenter's view).
  static IdenticalCase from_filter(const ModelParams& params);
  /// alpha_S, eta_S with the gain optimal for them.
  static IdenticalCase from_system(const ModelParams& params);

  double energy() const { return e_inf_identical(alpha, eta, k); }
  double rate() const { return rate_r0(k); }
};

enum class Stability { stable, marginal, unstable };
std::string to_string(Stability s);

/// |max Re lambda| below this counts as marginal.
inline constexpr double kMarginalTolerance = 1e-10;

struct StabilityReport {
  double max_re_lambda = 0.0;
  Stability stability = Stability::unstable;
  /// True when tau > 0 and the delay entered only to first order.
  bool first_order_delay = false;
  double e_inf_0 = 0.0;
  double r0 = 0.0;
  // Present only when stable.
  std::optional<double> rate_r;
  std::optional<double> e_inf_rho;
  std::optional<double> energy_ratio;
  std::optional<double> rate_ratio;
  std::optional<MomentVector> v_inf;

  bool stable() const { return stability == Stability::stable; }
};

/// Stability from the eigenvalues of M_inf; when stable also the stationary
/// moments, energy and rate, normalised by `baseline`.
StabilityReport classify(const ModelParams& params, const IdenticalCase& baseline);
/// Baseline taken from the filter's parameters.
StabilityReport classify(const ModelParams& params);

/// Determinants of the 2x2 blocks of the averaged mean equations. Both
/// nonzero guarantees zero stationary means.
struct ZeroMeanConditions {
  double det_m1 = 0.0;
  double det_m4 = 0.0;
  /// k within 1e-9 (relative) of 1 / (4 tau sqrt(aF aS eF eS) V_xp^pi).
  bool degenerate_k = false;
};
ZeroMeanConditions zero_mean_conditions(const ModelParams& params, const SteadyVariances& sv);

/// Coefficients of the system-mean equation with the delay expanded to first
/// order:
///   dx_rho = filter_drift x_pi dt + system_drift x_rho dt
///          + noise_w dW + noise_cl dW_cl.
struct MeanCoefficients {
  Mat2 filter_drift;
  Mat2 system_drift;
  Vec2 noise_w{};
  Vec2 noise_cl{};
};
MeanCoefficients delay_approx_means_matrices(const ModelParams& params, const SteadyVariances& sv);

/// Coefficients of the (undelayed) filter-mean equation:
///   dx_pi = filter_drift x_pi dt + system_drift x_rho dt
///         + noise_w dW + noise_cl dW_cl.
MeanCoefficients filter_means_matrices(const ModelParams& params, const CovMatrix& filter);

}  // namespace osc
