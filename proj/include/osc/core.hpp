#pragma once

// Parameter and state types for a continuously position-measured harmonic
// oscillator under linear feedback, with the estimator (filter) allowed to
// differ from the true system.
//
// Everything here is expressed in harmonic-oscillator units of the system:
// energy in hbar*omega_S, length in sqrt(hbar/(m*omega_S)), time in 1/omega_S.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace osc {

/// Thrown when a parameter set violates an invariant. `field()` names the
/// offending parameter.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// All scalar parameters of system, filter and imperfections.
struct ModelParams {
  double alpha_s = 0.1;    ///< system measurement strength
  double eta_s = 0.16;     ///< system detector efficiency, (0, 1]
  double alpha_f = 0.1;    ///< measurement strength assumed by the filter
  double eta_f = 0.16;     ///< efficiency assumed by the filter, (0, 1]
  double d_omega_f = 0.0;  ///< omega_F = omega_S (1 + d_omega_f)
  double nu = 0.0;         ///< classical noise strength on the filter's signal
  double tau = 0.0;        ///< control delay
  double k = 1.0;          ///< feedback strength

  /// Identical filter and system, no noise or delay, k = k_opt.
  static ModelParams matched(double alpha, double eta);
  /// Copy with k replaced by the gain an experimenter derives from the
  /// filter parameters (assuming nu = 0).
  ModelParams with_optimal_gain() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// 2x2 symmetric matrix (V_xx, V_xp; V_xp, V_pp). Used both for covariances,
/// which must be positive definite, and for their time derivatives.
struct CovMatrix {
  double v_xx = 0.0;
  double v_xp = 0.0;
  double v_pp = 0.0;

  double det() const { return v_xx * v_pp - v_xp * v_xp; }
  bool positive_definite() const { return v_xx > 0.0 && v_pp > 0.0 && det() > 0.0; }

  friend bool operator==(const CovMatrix&, const CovMatrix&) = default;
};

/// Conditional means of filter (pi) and system (rho).
struct MeanPair {
  double x_pi = 0.0;
  double p_pi = 0.0;
  double x_rho = 0.0;
  double p_rho = 0.0;

  bool finite() const;
  friend bool operator==(const MeanPair&, const MeanPair&) = default;
};

/// Returns `params` if every invariant holds, otherwise throws
/// ValidationError naming the first violated one.
const ModelParams& validate(const ModelParams& params);

/// Same as validate() but accepts any finite k. Nonpositive gains are a
/// legitimate thing to classify (they heat rather than cool).
const ModelParams& validate_plant(const ModelParams& params);

/// xi_S = sqrt(1 + 4 alpha_S^2 eta_S).
double xi_system(const ModelParams& params);
/// xi_F = sqrt(1 + 4 alpha_F^2 eta_F (1 + nu) / (1 + d_omega_f)^4).
double xi_filter(const ModelParams& params);

/// xi - 1 for xi = sqrt(1 + x), without cancellation at small x.
inline double xi_minus_one(double x) {
  // sqrt(1+x) - 1 == x / (sqrt(1+x) + 1)
  return x / (std::sqrt(1.0 + x) + 1.0);
}

/// Gain minimising the identical-case steady energy, built from the filter's
/// parameters with nu = 0.
double k_opt(double alpha_f, double eta_f, double d_omega_f = 0.0);

// ---------------------------------------------------------------------------
// Cavity BEC scenario

/// Physical constants used when mapping the cavity experiment onto alpha_S.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;                 // J s
  double rb85_mass = 85.0 * 1.66053906660e-27;   // kg, 85 u
};

/// Experimental parameters of the cavity-mediated centre-of-mass measurement.
/// Frequencies are angular (rad/s).
struct PhysicalScenario {
  double n_atoms = 1e4;
  double wavelength = 780e-9;
  double omega_s = 2.0 * std::numbers::pi * 110e3;
  double g0 = 2.0 * std::numbers::pi * 12e6;
  double kappa = 2.0 * std::numbers::pi * 2e6;
  double detuning = 2.0 * std::numbers::pi * 20e9;
  double nbar = 0.8;
  double mass = PhysicalConstants{}.rb85_mass;
  double hbar = PhysicalConstants{}.hbar;
};

struct BecMeasurement {
  double alpha_s = 0.0;  ///< dimensionless measurement strength
  double x_ho = 0.0;     ///< oscillator length sqrt(hbar/(m omega_S)), metres
  double k0 = 0.0;       ///< probe wave number 2 pi / lambda
};

/// alpha_S = 4 k0^2 N g0^4 nbar x_HO^2 / (omega_S kappa Delta^2).
/// Every field must be positive except nbar, which may be zero.
BecMeasurement bec_measurement_strength(const PhysicalScenario& s);

}  // namespace osc
