#include "osc/config.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

namespace osc::config {

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ValidationError(where, "unknown key '" + key + "'");
}

double number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(key, "expected a number");
  return v.get<double>();
}

template <class T>
T whole(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ValidationError(key, "expected an integer");
  if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
  const auto i = v.get<std::int64_t>();
  if (i < 0) throw ValidationError(key, "must not be negative");
  return static_cast<T>(i);
}

void maybe(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = number(j, key);
}

std::string text(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ValidationError(key, "expected a string");
  return v.get<std::string>();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const ModelParams& p) {
  return {{"alpha_s", p.alpha_s}, {"eta_s", p.eta_s}, {"alpha_f", p.alpha_f}, {"eta_f", p.eta_f},
          {"d_omega_f", p.d_omega_f}, {"nu", p.nu}, {"tau", p.tau}, {"k", p.k}};
}

ModelParams params_from_json(const json& j, ModelParams p) {
  only_keys(j, "params", {"alpha", "eta", "alpha_s", "eta_s", "alpha_f", "eta_f", "d_omega_f", "nu", "tau", "k"});
  if (j.contains("alpha")) p.alpha_s = p.alpha_f = number(j, "alpha");
  if (j.contains("eta")) p.eta_s = p.eta_f = number(j, "eta");
  maybe(j, "alpha_s", p.alpha_s);
  maybe(j, "eta_s", p.eta_s);
  maybe(j, "alpha_f", p.alpha_f);
  maybe(j, "eta_f", p.eta_f);
  maybe(j, "d_omega_f", p.d_omega_f);
  maybe(j, "nu", p.nu);
  maybe(j, "tau", p.tau);
  if (j.contains("k")) {
    if (j["k"].is_string()) {
      if (j["k"] != "k_opt") throw ValidationError("k", "expected a number or \"k_opt\"");
      p.k = k_opt(p.alpha_f, p.eta_f, p.d_omega_f);
    } else {
      p.k = number(j, "k");
    }
  }
  return p;
}

json to_json(const CovMatrix& v) { return {{"v_xx", v.v_xx}, {"v_xp", v.v_xp}, {"v_pp", v.v_pp}}; }

CovMatrix cov_from_json(const json& j, const std::string& field) {
  only_keys(j, field, {"v_xx", "v_xp", "v_pp"});
  try {
    return {number(j, "v_xx"), number(j, "v_xp"), number(j, "v_pp")};
  } catch (const json::out_of_range&) {
    throw ValidationError(field, "needs v_xx, v_xp and v_pp");
  }
}

json to_json(const MeanPair& x) {
  return {{"x_pi", x.x_pi}, {"p_pi", x.p_pi}, {"x_rho", x.x_rho}, {"p_rho", x.p_rho}};
}

MeanPair means_from_json(const json& j, MeanPair x) {
  only_keys(j, "x0", {"x_pi", "p_pi", "x_rho", "p_rho"});
  maybe(j, "x_pi", x.x_pi);
  maybe(j, "p_pi", x.p_pi);
  maybe(j, "x_rho", x.x_rho);
  maybe(j, "p_rho", x.p_rho);
  return x;
}

json to_json(const SimConfig& s) {
  json j{{"dt", s.dt},
         {"t_final", s.t_final},
         {"n_paths", s.n_paths},
         {"seed", s.seed},
         {"record_stride", s.record_stride},
         {"variance_mode", s.variance_mode == VarianceMode::integrate ? "integrate" : "analytic_steady"},
         {"threads", s.threads}};
  j["filter_v0"] = s.filter_v0 ? to_json(*s.filter_v0) : json(nullptr);
  j["system_v0"] = s.system_v0 ? to_json(*s.system_v0) : json(nullptr);
  return j;
}

SimConfig sim_from_json(const json& j, SimConfig s) {
  only_keys(j, "sim",
            {"dt", "t_final", "n_paths", "seed", "record_stride", "variance_mode", "filter_v0", "system_v0", "threads"});
  maybe(j, "dt", s.dt);
  maybe(j, "t_final", s.t_final);
  if (j.contains("n_paths")) s.n_paths = whole<std::size_t>(j, "n_paths");
  if (j.contains("seed")) s.seed = whole<std::uint64_t>(j, "seed");
  if (j.contains("record_stride")) s.record_stride = whole<std::size_t>(j, "record_stride");
  if (j.contains("threads")) s.threads = whole<int>(j, "threads");
  if (j.contains("variance_mode")) {
    const std::string m = text(j, "variance_mode");
    if (m == "integrate")
      s.variance_mode = VarianceMode::integrate;
    else if (m == "analytic_steady")
      s.variance_mode = VarianceMode::analytic_steady;
    else
      throw ValidationError("variance_mode", "expected analytic_steady or integrate");
  }
  for (auto [key, slot] : {std::pair{"filter_v0", &s.filter_v0}, std::pair{"system_v0", &s.system_v0}}) {
    if (!j.contains(key)) continue;
    if (j[key].is_null())
      slot->reset();
    else
      *slot = cov_from_json(j[key], key);
  }
  return s;
}

json to_json(const Axis& a) {
  return {{"name", a.name}, {"min", a.min}, {"max", a.max}, {"n_points", a.n_points}, {"spacing", to_string(a.spacing)}};
}

Axis axis_from_json(const json& j) {
  only_keys(j, "axes", {"name", "min", "max", "n_points", "spacing"});
  Axis a;
  try {
    a.name = text(j, "name");
    a.min = number(j, "min");
    a.max = number(j, "max");
    a.n_points = whole<std::size_t>(j, "n_points");
  } catch (const json::out_of_range&) {
    throw ValidationError("axes", "each axis needs name, min, max and n_points");
  }
  if (j.contains("spacing")) {
    const std::string s = text(j, "spacing");
    if (s == "log")
      a.spacing = Spacing::log;
    else if (s == "linear")
      a.spacing = Spacing::linear;
    else
      throw ValidationError("spacing", "expected linear or log");
  }
  return a;
}

json to_json(const SweepSpec& s) {
  json axes = json::array();
  for (const Axis& a : s.axes) axes.push_back(to_json(a));
  return {{"axes", axes},           {"fixed", to_json(s.fixed)},         {"method", to_string(s.method)},
          {"sim", to_json(s.sim)},  {"k_rule", to_string(s.k_rule)},     {"baseline", to_string(s.baseline)},
          {"threads", s.threads}};
}

SweepSpec sweep_from_json(const json& j, SweepSpec s) {
  only_keys(j, "sweep", {"axes", "fixed", "method", "sim", "k_rule", "baseline", "threads"});
  if (j.contains("axes")) {
    if (!j["axes"].is_array()) throw ValidationError("axes", "expected an array");
    s.axes.clear();
    for (const auto& a : j["axes"]) s.axes.push_back(axis_from_json(a));
  }
  if (j.contains("fixed")) s.fixed = params_from_json(j["fixed"], s.fixed);
  if (j.contains("sim")) s.sim = sim_from_json(j["sim"], s.sim);
  if (j.contains("threads")) s.threads = whole<int>(j, "threads");
  if (j.contains("method")) {
    const std::string m = text(j, "method");
    if (m != "analytic" && m != "numeric") throw ValidationError("method", "expected analytic or numeric");
    s.method = m == "numeric" ? Method::numeric : Method::analytic;
  }
  if (j.contains("k_rule")) {
    const json& k = j["k_rule"];
    if (k.is_number()) {
      s.k_rule = KRule::explicit_value;
      s.fixed.k = k.get<double>();
    } else {
      const std::string r = text(j, "k_rule");
      if (r != "k_opt_from_filter" && r != "explicit") throw ValidationError("k_rule", "expected k_opt_from_filter, explicit or a number");
      s.k_rule = r == "explicit" ? KRule::explicit_value : KRule::k_opt_from_filter;
    }
  }
  if (j.contains("baseline")) {
    const std::string b = text(j, "baseline");
    if (b != "filter" && b != "system") throw ValidationError("baseline", "expected filter or system");
    s.baseline = b == "system" ? BaselineRule::system : BaselineRule::filter;
  }
  return s;
}

json to_json(const PhysicalScenario& s) {
  return {{"n_atoms", s.n_atoms}, {"wavelength", s.wavelength}, {"omega_s", s.omega_s},
          {"g0", s.g0},           {"kappa", s.kappa},           {"detuning", s.detuning},
          {"nbar", s.nbar},       {"mass", s.mass},             {"hbar", s.hbar}};
}

PhysicalScenario scenario_from_json(const json& j, PhysicalScenario s) {
  only_keys(j, "physical", {"n_atoms", "wavelength", "omega_s", "g0", "kappa", "detuning", "nbar", "mass", "hbar"});
  maybe(j, "n_atoms", s.n_atoms);
  maybe(j, "wavelength", s.wavelength);
  maybe(j, "omega_s", s.omega_s);
  maybe(j, "g0", s.g0);
  maybe(j, "kappa", s.kappa);
  maybe(j, "detuning", s.detuning);
  maybe(j, "nbar", s.nbar);
  maybe(j, "mass", s.mass);
  maybe(j, "hbar", s.hbar);
  return s;
}

json to_json(const StabilityReport& r) {
  json j{{"stability", to_string(r.stability)},
         {"max_re_lambda", r.max_re_lambda},
         {"first_order_delay", r.first_order_delay},
         {"e_inf_0", r.e_inf_0},
         {"r0", r.r0},
         {"rate_r", optional_number(r.rate_r)},
         {"e_inf_rho", optional_number(r.e_inf_rho)},
         {"energy_ratio", optional_number(r.energy_ratio)},
         {"rate_ratio", optional_number(r.rate_ratio)}};
  j["v_inf"] = r.v_inf ? json(*r.v_inf) : json(nullptr);
  return j;
}

json to_json(const ZeroMeanConditions& z) {
  return {{"det_m1", z.det_m1}, {"det_m4", z.det_m4}, {"degenerate_k", z.degenerate_k}};
}

json to_json(const SweepResult& r) {
  json pts = json::array();
  for (const SweepPoint& p : r.points) {
    pts.push_back({{"coords", p.coords},
                   {"status", to_string(p.status)},
                   {"energy_ratio", optional_number(p.energy_ratio)},
                   {"rate_ratio", optional_number(p.rate_ratio)},
                   {"max_re_lambda", optional_number(p.max_re_lambda)},
                   {"final_ratio", optional_number(p.final_ratio)},
                   {"error", p.error}});
  }
  return {{"axes", r.axis_names}, {"method", to_string(r.method)}, {"points", pts}};
}

json to_json(const RunManifest& m) {
  return {{"version", m.version}, {"command", m.command}, {"config", m.config},   {"seed", m.seed},
          {"method", m.method},   {"files", m.files},     {"results", m.results}, {"started", m.started},
          {"finished", m.finished}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("version")) return j["config"];
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace osc::config
