#include "osc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <omp.h>

namespace osc {

std::string to_string(Spacing s) { return s == Spacing::log ? "log" : "linear"; }
std::string to_string(Method m) { return m == Method::numeric ? "numeric" : "analytic"; }
std::string to_string(KRule k) { return k == KRule::explicit_value ? "explicit" : "k_opt_from_filter"; }
std::string to_string(BaselineRule b) { return b == BaselineRule::system ? "system" : "filter"; }

std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::stable:
      return "stable";
    case PointStatus::marginal:
      return "marginal";
    case PointStatus::unstable:
      return "unstable";
    case PointStatus::error:
      return "error";
  }
  return "error";
}

std::vector<double> Axis::values() const {
  std::vector<double> v(n_points);
  if (n_points == 1) {
    v[0] = min;
    return v;
  }
  const double last = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double f = static_cast<double>(i) / last;
    v[i] = spacing == Spacing::log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min)))
                                   : min + f * (max - min);
  }
  // exact end points
  v.front() = min;
  v.back() = max;
  return v;
}

const std::vector<std::string>& axis_names() {
  static const std::vector<std::string> names{"alpha", "eta",       "alpha_f", "alpha_s", "eta_f",
                                              "eta_s", "d_omega_f", "nu",      "tau",     "k"};
  return names;
}

void apply_axis(ModelParams& p, const std::string& name, double value) {
  if (name == "alpha") {
    p.alpha_f = p.alpha_s = value;
  } else if (name == "eta") {
    p.eta_f = p.eta_s = value;
  } else if (name == "alpha_f") {
    p.alpha_f = value;
  } else if (name == "alpha_s") {
    p.alpha_s = value;
  } else if (name == "eta_f") {
    p.eta_f = value;
  } else if (name == "eta_s") {
    p.eta_s = value;
  } else if (name == "d_omega_f") {
    p.d_omega_f = value;
  } else if (name == "nu") {
    p.nu = value;
  } else if (name == "tau") {
    p.tau = value;
  } else if (name == "k") {
    p.k = value;
  } else {
    throw ValidationError("axes", "unknown parameter '" + name + "'");
  }
}

void validate(const SweepSpec& spec) {
  if (spec.axes.empty()) throw ValidationError("axes", "no axis given");
  if (spec.axes.size() > 2) throw ValidationError("axes", "more than two axes");
  std::set<std::string> touched;
  for (const Axis& a : spec.axes) {
    const auto& names = axis_names();
    if (std::find(names.begin(), names.end(), a.name) == names.end())
      throw ValidationError("axes", "unknown parameter '" + a.name + "'");
    // "alpha" overlaps alpha_f/alpha_s, likewise eta
    std::vector<std::string> covers{a.name};
    if (a.name == "alpha") covers = {"alpha_f", "alpha_s"};
    if (a.name == "eta") covers = {"eta_f", "eta_s"};
    for (const auto& c : covers)
      if (!touched.insert(c).second) throw ValidationError("axes", "parameter '" + a.name + "' swept twice");
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw ValidationError("axes", a.name + " range not finite");
    if (a.n_points < 1 || (a.n_points == 1 && a.min != a.max))
      throw ValidationError("axes", a.name + " needs at least two points");
    if (a.spacing == Spacing::log && !(a.min > 0.0 && a.max > 0.0))
      throw ValidationError("axes", a.name + " log spacing needs a positive range");
    if (a.name == "k" && spec.k_rule == KRule::k_opt_from_filter)
      throw ValidationError("k_rule", "k axis needs the explicit k rule");
  }
  validate_plant(spec.fixed);
  if (spec.threads < 0) throw ValidationError("threads", "negative thread count");
  if (spec.method == Method::numeric) validate(spec.sim, ModelParams{});
}

ModelParams point_params(const SweepSpec& spec, const std::vector<double>& coords) {
  ModelParams p = spec.fixed;
  for (std::size_t i = 0; i < spec.axes.size(); ++i) apply_axis(p, spec.axes[i].name, coords[i]);
  if (spec.k_rule == KRule::k_opt_from_filter) p.k = k_opt(p.alpha_f, p.eta_f, p.d_omega_f);
  return p;
}

SweepPoint evaluate_point(const SweepSpec& spec, const std::vector<double>& coords, std::uint64_t seed) {
  SweepPoint pt;
  pt.coords = coords;
  try {
    const ModelParams p = validate_plant(point_params(spec, coords));
    const IdenticalCase base =
        spec.baseline == BaselineRule::system ? IdenticalCase::from_system(p) : IdenticalCase::from_filter(p);
    if (spec.method == Method::analytic) {
      const StabilityReport r = classify(p, base);
      pt.max_re_lambda = r.max_re_lambda;
      pt.status = r.stability == Stability::stable     ? PointStatus::stable
                  : r.stability == Stability::marginal ? PointStatus::marginal
                                                       : PointStatus::unstable;
      pt.energy_ratio = r.energy_ratio;
      pt.rate_ratio = r.rate_ratio;
    } else {
      SimConfig sim = spec.sim;
      sim.seed = seed;
      sim.threads = 1;
      const NumericClassification r = classify_numeric(p, sim, base);
      pt.final_ratio = r.final_ratio;
      pt.status = r.stable ? PointStatus::stable : PointStatus::unstable;
      if (r.stable) pt.energy_ratio = r.final_ratio;
    }
  } catch (const std::exception& e) {
    pt.status = PointStatus::error;
    pt.error = e.what();
  }
  return pt;
}

namespace {

std::vector<std::vector<double>> grid(const SweepSpec& spec) {
  std::vector<std::vector<double>> out;
  const auto v1 = spec.axes[0].values();
  if (spec.axes.size() == 1) {
    for (double a : v1) out.push_back({a});
    return out;
  }
  const auto v2 = spec.axes[1].values();
  for (double a : v1)
    for (double b : v2) out.push_back({a, b});
  return out;
}

SweepResult skeleton(const SweepSpec& spec, std::size_t n) {
  SweepResult r;
  for (const Axis& a : spec.axes) r.axis_names.push_back(a.name);
  r.method = spec.method;
  r.points.resize(n);
  return r;
}

bool is_stable(const SweepPoint& p) { return p.status == PointStatus::stable; }

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec);
  const auto coords = grid(spec);
  SweepResult r = skeleton(spec, coords.size());
  const auto n = static_cast<std::ptrdiff_t>(coords.size());
  const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    r.points[idx] = evaluate_point(spec, coords[idx], stream_seed(spec.sim.seed, idx));
  }
  return r;
}

SweepResult run_sweep_serial(const SweepSpec& spec) {
  validate(spec);
  const auto coords = grid(spec);
  SweepResult r = skeleton(spec, coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) r.points[i] = evaluate_point(spec, coords[i], stream_seed(spec.sim.seed, i));
  return r;
}

BoundaryEstimate detect_instability_boundary(const SweepSpec& spec, double resolution) {
  if (spec.axes.size() != 1) throw ValidationError("axes", "boundary search needs exactly one axis");
  if (!(resolution > 0.0)) throw ValidationError("resolution", "resolution nonpositive");
  const SweepResult scan = run_sweep(spec);
  const auto& pts = scan.points;

  BoundaryEstimate b;
  b.axis = spec.axes[0].name;
  b.evaluations = pts.size();
  std::size_t i = 1;
  while (i < pts.size() && is_stable(pts[i]) == is_stable(pts[0])) ++i;
  if (i == pts.size()) throw NoTransitionError();

  double lo = pts[i - 1].coords[0];
  double hi = pts[i].coords[0];
  const bool lo_stable = is_stable(pts[i - 1]);
  b.lo_status = pts[i - 1].status;
  b.hi_status = pts[i].status;
  // a simulated delay has to sit on the step grid, so bisect in whole steps
  const bool on_grid = spec.method == Method::numeric && b.axis == "tau";
  const double step = spec.sim.dt;
  // bisection seeds continue past the scan's point indices
  std::uint64_t index = pts.size();
  while (std::abs(hi - lo) > resolution) {
    double mid = 0.5 * (lo + hi);
    if (on_grid) {
      if (std::abs(hi - lo) <= step * (1.0 + 1e-9)) break;
      mid = step * std::round(mid / step);
      if (mid == lo || mid == hi) break;
    }
    const SweepPoint m = evaluate_point(spec, {mid}, stream_seed(spec.sim.seed, index++));
    ++b.evaluations;
    if (is_stable(m) == lo_stable) {
      lo = mid;
      b.lo_status = m.status;
    } else {
      hi = mid;
      b.hi_status = m.status;
    }
  }
  b.lo = lo;
  b.hi = hi;
  return b;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(17) << *v;
  return os.str();
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const SweepResult& result) {
  os << "axis1,axis2,stable,energy_ratio,rate_ratio,max_re_lambda,error\n";
  for (const SweepPoint& p : result.points) {
    os << cell(p.coords.at(0)) << ',' << (p.coords.size() > 1 ? cell(p.coords[1]) : "") << ',' << to_string(p.status)
       << ',' << cell(p.energy_ratio) << ',' << cell(p.rate_ratio) << ',' << cell(p.max_re_lambda) << ','
       << quoted(p.error) << '\n';
  }
}

}  // namespace osc
