#include "osc/core.hpp"

#include <cmath>

namespace osc {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ValidationError(field, what);
}

void validate_common(const ModelParams& p) {
  require(std::isfinite(p.alpha_s) && p.alpha_s > 0.0, "alpha_s", "measurement strength nonpositive");
  require(std::isfinite(p.eta_s) && p.eta_s > 0.0 && p.eta_s <= 1.0, "eta_s", "efficiency out of range");
  require(std::isfinite(p.alpha_f) && p.alpha_f > 0.0, "alpha_f", "measurement strength nonpositive");
  require(std::isfinite(p.eta_f) && p.eta_f > 0.0 && p.eta_f <= 1.0, "eta_f", "efficiency out of range");
  require(std::isfinite(p.d_omega_f) && 1.0 + p.d_omega_f > 0.0, "d_omega_f", "trap frequency nonpositive");
  require(std::isfinite(p.nu) && p.nu >= 0.0, "nu", "classical noise negative");
  require(std::isfinite(p.tau) && p.tau >= 0.0, "tau", "delay negative");
  require(std::isfinite(p.k), "k", "feedback strength not finite");
}

}  // namespace

ModelParams ModelParams::matched(double alpha, double eta) {
  ModelParams p;
  p.alpha_s = p.alpha_f = alpha;
  p.eta_s = p.eta_f = eta;
  p.d_omega_f = p.nu = p.tau = 0.0;
  p.k = k_opt(alpha, eta, 0.0);
  return p;
}

ModelParams ModelParams::with_optimal_gain() const {
  ModelParams p = *this;
  p.k = k_opt(alpha_f, eta_f, d_omega_f);
  return p;
}

bool MeanPair::finite() const {
  return std::isfinite(x_pi) && std::isfinite(p_pi) && std::isfinite(x_rho) && std::isfinite(p_rho);
}

const ModelParams& validate(const ModelParams& params) {
  validate_common(params);
  require(params.k > 0.0, "k", "feedback strength nonpositive");
  return params;
}

const ModelParams& validate_plant(const ModelParams& params) {
  validate_common(params);
  return params;
}

double xi_system(const ModelParams& p) {
  return std::sqrt(1.0 + 4.0 * p.alpha_s * p.alpha_s * p.eta_s);
}

double xi_filter(const ModelParams& p) {
  const double w2 = (1.0 + p.d_omega_f) * (1.0 + p.d_omega_f);
  return std::sqrt(1.0 + 4.0 * p.alpha_f * p.alpha_f * p.eta_f * (1.0 + p.nu) / (w2 * w2));
}

double k_opt(double alpha_f, double eta_f, double d_omega_f) {
  const double w = 1.0 + d_omega_f;
  const double x = 4.0 * alpha_f * alpha_f * eta_f / (w * w * w * w);
  return 2.0 * alpha_f * std::sqrt(eta_f) / w / std::sqrt(xi_minus_one(x));
}

BecMeasurement bec_measurement_strength(const PhysicalScenario& s) {
  require(s.n_atoms > 0.0, "n_atoms", "must be positive");
  require(s.wavelength > 0.0, "wavelength", "must be positive");
  require(s.omega_s > 0.0, "omega_s", "must be positive");
  require(s.g0 > 0.0, "g0", "must be positive");
  require(s.kappa > 0.0, "kappa", "must be positive");
  require(s.detuning > 0.0, "detuning", "must be positive");
  require(s.nbar >= 0.0, "nbar", "must be nonnegative");
  require(s.mass > 0.0, "mass", "must be positive");
  require(s.hbar > 0.0, "hbar", "must be positive");

  BecMeasurement m;
  m.k0 = 2.0 * std::numbers::pi / s.wavelength;
  m.x_ho = std::sqrt(s.hbar / (s.mass * s.omega_s));
  const double g2 = s.g0 * s.g0;
  m.alpha_s = 4.0 * m.k0 * m.k0 * s.n_atoms * g2 * g2 * s.nbar * m.x_ho * m.x_ho /
              (s.omega_s * s.kappa * s.detuning * s.detuning);
  return m;
}

}  // namespace osc
