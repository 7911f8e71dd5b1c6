#pragma once

// Monte Carlo ensemble of the conditional-mean equations. Each path carries
// the filter means (x_pi, p_pi) and system means (x_rho, p_rho); the system's
// control input reads the filter momentum from tau ago.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "osc/analytic.hpp"
#include "osc/core.hpp"

namespace osc {

enum class VarianceMode { analytic_steady, integrate };

struct SimConfig {
  double dt = 1e-2;
  double t_final = 50.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  std::size_t record_stride = 100;
  VarianceMode variance_mode = VarianceMode::analytic_steady;
  /// Initial conditional variances for integrate mode; steady state if unset.
  std::optional<CovMatrix> filter_v0;
  std::optional<CovMatrix> system_v0;
  /// Worker threads; 0 leaves the OpenMP default.
  int threads = 0;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Throws ValidationError. Also checks the delay against the grid.
void validate(const SimConfig& sim, const ModelParams& params);

/// Number of whole steps covering [0, t_final].
std::size_t step_count(const SimConfig& sim);
/// tau / dt, rounded; the caller must have validated alignment.
std::size_t delay_steps(double tau, double dt);

struct TrajectoryStats {
  std::vector<double> times;
  /// E[(x_rho^2 + p_rho^2) / 2] + (V_xx^rho + V_pp^rho) / 2 per sample.
  std::vector<double> mean_energy;
  std::vector<double> std_error;
  /// Ensemble estimate of v_t, ordered as MomentIndex.
  std::vector<MomentVector> second_moments;

  // Ensemble mean of the system means at t_final, with standard errors.
  double mean_x_rho = 0.0;
  double mean_p_rho = 0.0;
  double se_x_rho = 0.0;
  double se_p_rho = 0.0;

  /// Largest |x_pi - x_rho| and |p_pi - p_rho| seen on any path at any step.
  double max_dev_x = 0.0;
  double max_dev_p = 0.0;

  bool diverged = false;
  std::size_t n_diverged = 0;
};

/// Per-path energy above this multiple of the baseline energy freezes
/// the path and marks the run diverged.
inline constexpr double kDivergenceRatio = 1e8;

struct RiccatiSeries {
  std::vector<double> times;
  std::vector<CovMatrix> values;
};

/// Fixed-step RK4 of one Riccati equation. Throws std::runtime_error
/// ("positivity lost") if any stage leaves the positive-definite cone.
RiccatiSeries integrate_riccati(const CovMatrix& v0, Side side, const ModelParams& params, double dt,
                                double t_final);

/// Conditional variances on the half-step grid t = j dt / 2, shared by every
/// path. Constant in analytic-steady mode.
class VarianceSchedule {
 public:
  /// Steady state.
  explicit VarianceSchedule(const ModelParams& params);
  /// Integrated from (filter0, system0) over [0, t_final], or until it stops
  /// changing, whichever is first; held constant afterwards.
  VarianceSchedule(const ModelParams& params, const CovMatrix& filter0, const CovMatrix& system0, double dt,
                   double t_final);

  std::size_t size() const { return filter_.size(); }

  /// Half-step index j, i.e. t = j dt / 2.
  const CovMatrix& filter(std::size_t j) const { return filter_[std::min(j, filter_.size() - 1)]; }
  const CovMatrix& system(std::size_t j) const { return system_[std::min(j, system_.size() - 1)]; }

 private:
  std::vector<CovMatrix> filter_;
  std::vector<CovMatrix> system_;
};

/// One path: state and the ring of past filter momenta.
struct PathState {
  std::array<double, 4> z{};  // x_pi, p_pi, x_rho, p_rho
  std::vector<double> p_ring;
  std::size_t n = 0;
  bool frozen = false;
};

/// Advances one path. The drift is linear, so a noise half-kick, an RK4
/// step of the deterministic flow and a second half-kick give second-order
/// weak accuracy for this additive-noise system.
class MeanStepper {
 public:
  MeanStepper(const ModelParams& params, double dt, const VarianceSchedule& schedule);

  PathState start(const MeanPair& x0) const;
  /// dw, dw_cl ~ N(0, dt).
  void step(PathState& s, double dw, double dw_cl) const;

  double dt() const { return dt_; }
  std::size_t delay() const { return lag_; }

 private:
  struct Coeffs {
    double f00, f01, f10, f11;  // filter drift on x_pi
    double c00, c10;            // filter drift on x_rho (only the x column is nonzero)
    double g_pi0, g_pi1;        // filter noise
    double g_rho0, g_rho1;      // system noise
  };
  Coeffs make_coeffs(std::size_t half_index) const;
  const Coeffs& coeffs(std::size_t j) const { return table_[std::min(j, table_.size() - 1)]; }
  std::array<double, 4> drift(const std::array<double, 4>& z, double p_delayed, const Coeffs& c) const;
  std::array<double, 2> delayed(const PathState& s) const;

  ModelParams params_;
  double dt_;
  std::size_t lag_;
  double sqrt_nu_;
  const VarianceSchedule* schedule_;
  std::vector<Coeffs> table_;
};

/// Runs the ensemble in parallel. Results do not depend on the thread count.
TrajectoryStats simulate_means(const ModelParams& params, const SimConfig& sim, const MeanPair& x0);
TrajectoryStats simulate_means(const ModelParams& params, const SimConfig& sim, const MeanPair& x0,
                               const IdenticalCase& baseline);

/// Straightforward single-threaded implementation, kept as the reference the
/// parallel kernel is tested against.
TrajectoryStats simulate_means_reference(const ModelParams& params, const SimConfig& sim, const MeanPair& x0,
                                         const IdenticalCase& baseline);

struct NumericClassification {
  bool stable = false;
  double final_ratio = 0.0;
  bool diverged = false;
  double e_inf_0 = 0.0;
};

/// Stable iff the ensemble energy at t_final is within 100 times the
/// baseline and no path diverged. Starts from zero means at steady variances.
NumericClassification classify_numeric(const ModelParams& params, const SimConfig& sim,
                                       const IdenticalCase& baseline);
NumericClassification classify_numeric(const ModelParams& params, const SimConfig& sim);

/// Per-path generator seed from (master seed, path index).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace osc
