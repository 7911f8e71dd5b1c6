#pragma once

// Grids over one or two parameters, each point classified analytically
// (eigenvalues of the moment drift matrix) or numerically (ensemble run).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "osc/analytic.hpp"
#include "osc/core.hpp"
#include "osc/sde.hpp"

namespace osc {

enum class Spacing { linear, log };
enum class Method { analytic, numeric };
enum class KRule { k_opt_from_filter, explicit_value };
enum class BaselineRule { filter, system };

std::string to_string(Spacing s);
std::string to_string(Method m);
std::string to_string(KRule k);
std::string to_string(BaselineRule b);

struct Axis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  std::size_t n_points = 2;
  Spacing spacing = Spacing::linear;

  std::vector<double> values() const;
  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Names an axis may take. "alpha" and "eta" move filter and system together.
const std::vector<std::string>& axis_names();

/// Sets the named parameter(s) on `p`. Throws ValidationError on an unknown
/// name.
void apply_axis(ModelParams& p, const std::string& name, double value);

struct SweepSpec {
  std::vector<Axis> axes;
  ModelParams fixed;
  Method method = Method::analytic;
  SimConfig sim;
  KRule k_rule = KRule::k_opt_from_filter;
  BaselineRule baseline = BaselineRule::filter;
  /// Worker threads over grid points; 0 leaves the OpenMP default.
  int threads = 0;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// Throws ValidationError.
void validate(const SweepSpec& spec);

enum class PointStatus { stable, marginal, unstable, error };
std::string to_string(PointStatus s);

struct SweepPoint {
  std::vector<double> coords;
  PointStatus status = PointStatus::error;
  std::optional<double> energy_ratio;
  std::optional<double> rate_ratio;
  /// Analytic only.
  std::optional<double> max_re_lambda;
  /// Numeric only: ensemble energy over the baseline at t_final, kept for
  /// unstable points too.
  std::optional<double> final_ratio;
  std::string error;
};

struct SweepResult {
  std::vector<std::string> axis_names;
  Method method = Method::analytic;
  std::vector<SweepPoint> points;  // first axis outermost
};

/// Parameters at one grid point, including the k rule.
ModelParams point_params(const SweepSpec& spec, const std::vector<double>& coords);
/// Evaluates one point; never throws, failures land in `error`.
SweepPoint evaluate_point(const SweepSpec& spec, const std::vector<double>& coords, std::uint64_t seed);

/// Parallel over points. Validates the spec (throws ValidationError); any
/// per-point failure is recorded in the result.
SweepResult run_sweep(const SweepSpec& spec);
/// Serial reference; must equal run_sweep bit for bit.
SweepResult run_sweep_serial(const SweepSpec& spec);

class NoTransitionError : public std::runtime_error {
 public:
  NoTransitionError() : std::runtime_error("no transition") {}
};

struct BoundaryEstimate {
  std::string axis;
  double lo = 0.0;  ///< last value classified like the axis start
  double hi = 0.0;  ///< first value classified otherwise
  PointStatus lo_status = PointStatus::stable;
  PointStatus hi_status = PointStatus::unstable;
  std::size_t evaluations = 0;
};

/// Scans the single axis for the first change between stable and
/// not-stable, then bisects that bracket down to `resolution`. A numeric
/// tau axis is bisected on the dt grid and stops at one step.
BoundaryEstimate detect_instability_boundary(const SweepSpec& spec, double resolution);

/// `axis1,axis2,stable,energy_ratio,rate_ratio,max_re_lambda,error`;
/// 17 significant digits, empty cells for absent values.
void write_csv(std::ostream& os, const SweepResult& result);

}  // namespace osc
