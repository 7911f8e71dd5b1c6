#include "osc/cli.hpp"

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "osc/analytic.hpp"
#include "osc/config.hpp"
#include "osc/core.hpp"
#include "osc/sde.hpp"
#include "osc/sweep.hpp"

namespace osc {

namespace {

using config::json;
namespace fs = std::filesystem;

// Flags shared by every command that takes a parameter point.
struct ParamFlags {
  std::optional<double> alpha, eta, alpha_s, eta_s, alpha_f, eta_f, d_omega_f, nu, tau;
  std::optional<std::string> k;

  void attach(CLI::App& app) {
    app.add_option("--alpha", alpha, "measurement strength, filter and system");
    app.add_option("--eta", eta, "detector efficiency, filter and system");
    app.add_option("--alpha-s", alpha_s, "system measurement strength");
    app.add_option("--eta-s", eta_s, "system detector efficiency");
    app.add_option("--alpha-f", alpha_f, "filter measurement strength");
    app.add_option("--eta-f", eta_f, "filter detector efficiency");
    app.add_option("--d-omega-f", d_omega_f, "relative error of the filter's trap frequency");
    app.add_option("--nu", nu, "classical noise on the filter's signal");
    app.add_option("--tau", tau, "feedback delay");
    app.add_option("--k", k, "feedback strength, or 'opt' for k_opt of the filter")->allow_extra_args(false);
  }

  /// Overlays the flags on a params object from a config file. Flags win,
  /// including over the per-side keys a joint flag covers.
  json merge(json base) const {
    if (base.is_null()) base = json::object();
    if (!base.is_object()) throw ValidationError("params", "expected an object");
    auto set = [&](const char* key, const std::optional<double>& v) {
      if (v) base[key] = *v;
    };
    if (alpha) {
      base.erase("alpha_f");
      base.erase("alpha_s");
    }
    if (eta) {
      base.erase("eta_f");
      base.erase("eta_s");
    }
    set("alpha", alpha);
    set("eta", eta);
    set("alpha_s", alpha_s);
    set("eta_s", eta_s);
    set("alpha_f", alpha_f);
    set("eta_f", eta_f);
    set("d_omega_f", d_omega_f);
    set("nu", nu);
    set("tau", tau);
    if (k) {
      if (*k == "opt" || *k == "k_opt") {
        base["k"] = "k_opt";
      } else {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(*k, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != k->size()) throw ValidationError("k", "expected a number or 'opt'");
        base["k"] = v;
      }
    }
    if (!base.contains("k")) base["k"] = "k_opt";
    return base;
  }
};

struct SimFlags {
  std::optional<double> dt, t_final;
  std::optional<std::size_t> paths, stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variance_mode;
  std::vector<double> filter_v0, system_v0, v0;
  std::optional<int> threads;

  void attach(CLI::App& app) {
    app.add_option("--dt", dt, "time step");
    app.add_option("--t-final", t_final, "integration horizon");
    app.add_option("--paths", paths, "ensemble size");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--stride", stride, "steps between recorded samples");
    app.add_option("--variance-mode", variance_mode, "analytic_steady or integrate")
        ->check(CLI::IsMember({"analytic_steady", "integrate"}));
    app.add_option("--v0", v0, "initial variances V_xx,V_xp,V_pp for both filter and system")
        ->expected(3)
        ->delimiter(',');
    app.add_option("--filter-v0", filter_v0, "initial filter variances V_xx,V_xp,V_pp")->expected(3)->delimiter(',');
    app.add_option("--system-v0", system_v0, "initial system variances V_xx,V_xp,V_pp")->expected(3)->delimiter(',');
    app.add_option("--threads", threads, "worker threads (default: OSC_THREADS or all cores)");
  }

  json merge(json base) const {
    if (base.is_null()) base = json::object();
    if (!base.is_object()) throw ValidationError("sim", "expected an object");
    if (dt) base["dt"] = *dt;
    if (t_final) base["t_final"] = *t_final;
    if (paths) base["n_paths"] = *paths;
    if (seed) base["seed"] = *seed;
    if (stride) base["record_stride"] = *stride;
    if (variance_mode) base["variance_mode"] = *variance_mode;
    if (threads) base["threads"] = *threads;
    auto cov = [](const std::vector<double>& v) { return json{{"v_xx", v[0]}, {"v_xp", v[1]}, {"v_pp", v[2]}}; };
    if (!v0.empty()) base["filter_v0"] = base["system_v0"] = cov(v0);
    if (!filter_v0.empty()) base["filter_v0"] = cov(filter_v0);
    if (!system_v0.empty()) base["system_v0"] = cov(system_v0);
    return base;
  }
};

json member_or_null(const json& j, const char* key) { return j.is_object() && j.contains(key) ? j[key] : json(); }

void require_keys(const json& j, std::initializer_list<const char*> keys) {
  if (j.is_null()) return;
  if (!j.is_object()) throw ValidationError("config", "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw ValidationError("config", "unknown key '" + key + "'");
  }
}

BaselineRule baseline_from(const json& cfg, const std::optional<std::string>& flag) {
  std::string b = "filter";
  if (cfg.is_object() && cfg.contains("baseline")) {
    if (!cfg["baseline"].is_string()) throw ValidationError("baseline", "expected filter or system");
    b = cfg["baseline"].get<std::string>();
  }
  if (flag) b = *flag;
  if (b != "filter" && b != "system") throw ValidationError("baseline", "expected filter or system");
  return b == "system" ? BaselineRule::system : BaselineRule::filter;
}

IdenticalCase baseline_case(BaselineRule rule, const ModelParams& p) {
  return rule == BaselineRule::system ? IdenticalCase::from_system(p) : IdenticalCase::from_filter(p);
}

// Human-readable tables carry six significant digits.
std::string h6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string h6(const std::optional<double>& v) { return v ? h6(*v) : "-"; }

void row(std::ostream& out, const std::string& label, const std::string& value) {
  out << "  " << std::left << std::setw(22) << label << value << '\n';
}

std::string csv17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_energy_csv(const fs::path& path, const TrajectoryStats& st) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "t,mean_energy,std_error\n";
  for (std::size_t i = 0; i < st.times.size(); ++i)
    f << csv17(st.times[i]) << ',' << csv17(st.mean_energy[i]) << ',' << csv17(st.std_error[i]) << '\n';
}

void ensure_parent(const fs::path& prefix) {
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) { return fs::path(prefix.string() + suffix); }

int exit_for(Stability s) { return s == Stability::stable ? kExitStable : kExitUnstable; }

// --- report ------------------------------------------------------------------

struct ReportCmd {
  std::optional<std::string> config_path, baseline, output;
  bool as_json = false;
  ParamFlags params;

  int run(std::ostream& out) const {
    const json file = config_path ? config::load_config(*config_path) : json();
    require_keys(file, {"params", "baseline"});
    const ModelParams p = validate_plant(config::params_from_json(params.merge(member_or_null(file, "params"))));
    const BaselineRule rule = baseline_from(file, baseline);
    const StabilityReport r = classify(p, baseline_case(rule, p));
    const ZeroMeanConditions z = zero_mean_conditions(p, steady_variances(p));
    const json resolved{{"params", config::to_json(p)}, {"baseline", to_string(rule)}};

    if (as_json) {
      out << json{{"config", resolved}, {"report", config::to_json(r)}, {"zero_mean", config::to_json(z)}}.dump(2)
          << '\n';
    } else {
      out << "report\n";
      row(out, "stability", to_string(r.stability));
      row(out, "max Re lambda", h6(r.max_re_lambda));
      row(out, "delay", r.first_order_delay ? "first order in tau" : "none");
      row(out, "k", h6(p.k));
      row(out, "E_inf (system)", h6(r.e_inf_rho));
      row(out, "E_inf (identical)", h6(r.e_inf_0));
      row(out, "energy ratio", h6(r.energy_ratio));
      row(out, "rate r", h6(r.rate_r));
      row(out, "rate r0 (identical)", h6(r.r0));
      row(out, "rate ratio r0/r", h6(r.rate_ratio));
      row(out, "det M1", h6(z.det_m1));
      row(out, "det M4", h6(z.det_m4));
      row(out, "excluded k", z.degenerate_k ? "yes" : "no");
      row(out, "baseline", to_string(rule));
    }
    if (output) {
      ensure_parent(*output);
      config::RunManifest m;
      m.command = "report";
      m.config = resolved;
      m.method = "analytic";
      m.started = m.finished = config::utc_timestamp();
      m.files = {*output};
      m.results = {{"report", config::to_json(r)}, {"zero_mean", config::to_json(z)}};
      config::write_json(*output, config::to_json(m));
    }
    return exit_for(r.stability);
  }
};

// --- sweep -------------------------------------------------------------------

struct SweepCmd {
  std::string spec_path;
  std::string out_prefix = "sweep";
  std::optional<int> threads;
  std::optional<std::string> method;

  int run(std::ostream& out) const {
    const std::string started = config::utc_timestamp();
    SweepSpec spec = config::sweep_from_json(config::load_config(spec_path));
    if (threads) spec.threads = *threads;
    if (method) spec.method = *method == "numeric" ? Method::numeric : Method::analytic;
    validate(spec);
    const SweepResult result = run_sweep(spec);

    const fs::path prefix(out_prefix);
    ensure_parent(prefix);
    const fs::path csv = with_suffix(prefix, ".csv");
    const fs::path js = with_suffix(prefix, ".json");
    const fs::path man = with_suffix(prefix, ".manifest.json");
    {
      std::ofstream f(csv);
      if (!f) throw std::runtime_error("cannot write " + csv.string());
      write_csv(f, result);
    }
    config::write_json(js, {{"version", OSC_VERSION},
                            {"spec", config::to_json(spec)},
                            {"seed", spec.sim.seed},
                            {"result", config::to_json(result)}});
    config::RunManifest m;
    m.command = "sweep";
    m.config = config::to_json(spec);
    m.seed = spec.sim.seed;
    m.method = to_string(spec.method);
    m.files = {csv.string(), js.string()};
    m.started = started;
    m.finished = config::utc_timestamp();
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& p : result.points) ++counts[static_cast<int>(p.status)];
    m.results = {{"stable", counts[0]}, {"marginal", counts[1]}, {"unstable", counts[2]}, {"error", counts[3]}};
    config::write_json(man, config::to_json(m));

    out << "sweep over";
    for (const auto& n : result.axis_names) out << ' ' << n;
    out << " (" << to_string(spec.method) << ")\n";
    row(out, "points", std::to_string(result.points.size()));
    row(out, "stable", std::to_string(counts[0]));
    row(out, "marginal", std::to_string(counts[1]));
    row(out, "unstable", std::to_string(counts[2]));
    row(out, "errors", std::to_string(counts[3]));
    row(out, "csv", csv.string());
    row(out, "json", js.string());
    row(out, "manifest", man.string());
    return kExitStable;
  }
};

// --- simulate ----------------------------------------------------------------

struct SimulateCmd {
  std::optional<std::string> config_path, baseline;
  std::string out_prefix = "simulate";
  std::vector<double> x0;
  bool expect_stable = false;
  ParamFlags params;
  SimFlags sim;

  int run(std::ostream& out, std::optional<int> env_threads) const {
    const std::string started = config::utc_timestamp();
    const json file = config_path ? config::load_config(*config_path) : json();
    require_keys(file, {"params", "sim", "x0", "baseline", "expect_stable"});
    const ModelParams p = validate_plant(config::params_from_json(params.merge(member_or_null(file, "params"))));
    SimConfig s = config::sim_from_json(sim.merge(member_or_null(file, "sim")));
    if (!sim.threads && !(file.is_object() && file.contains("sim") && file["sim"].contains("threads")) && env_threads)
      s.threads = *env_threads;
    validate(s, p);
    MeanPair start = file.is_object() && file.contains("x0") ? config::means_from_json(file["x0"]) : MeanPair{};
    if (!x0.empty()) start = {x0[0], x0[1], x0[2], x0[3]};
    bool expect = expect_stable;
    if (file.is_object() && file.contains("expect_stable")) {
      if (!file["expect_stable"].is_boolean()) throw ValidationError("expect_stable", "expected a boolean");
      expect = expect || file["expect_stable"].get<bool>();
    }
    const BaselineRule rule = baseline_from(file, baseline);
    const IdenticalCase base = baseline_case(rule, p);

    const TrajectoryStats st = simulate_means(p, s, start, base);
    const StabilityReport analytic = classify(p, base);

    const fs::path prefix(out_prefix);
    ensure_parent(prefix);
    const fs::path csv = with_suffix(prefix, ".csv");
    const fs::path man = with_suffix(prefix, ".manifest.json");
    write_energy_csv(csv, st);

    config::RunManifest m;
    m.command = "simulate";
    m.config = {{"params", config::to_json(p)},
                {"sim", config::to_json(s)},
                {"x0", config::to_json(start)},
                {"baseline", to_string(rule)},
                {"expect_stable", expect}};
    m.seed = s.seed;
    m.method = "numeric";
    m.files = {csv.string()};
    m.started = started;
    m.finished = config::utc_timestamp();
    m.results = {{"e_inf_analytic", analytic.e_inf_rho ? json(*analytic.e_inf_rho) : json(nullptr)},
                 {"e_inf_0", analytic.e_inf_0},
                 {"analytic_stability", to_string(analytic.stability)},
                 {"final_energy", st.mean_energy.back()},
                 {"final_std_error", st.std_error.back()},
                 {"diverged", st.diverged},
                 {"n_diverged", st.n_diverged}};
    config::write_json(man, config::to_json(m));

    out << "simulate\n";
    row(out, "paths", std::to_string(s.n_paths));
    row(out, "dt", h6(s.dt));
    row(out, "t_final", h6(st.times.back()));
    row(out, "final energy", h6(st.mean_energy.back()) + " +/- " + h6(st.std_error.back()));
    row(out, "analytic E_inf", h6(analytic.e_inf_rho));
    row(out, "diverged paths", std::to_string(st.n_diverged));
    row(out, "csv", csv.string());
    row(out, "manifest", man.string());
    if (st.diverged) return expect ? kExitDiverged : kExitUnstable;
    return kExitStable;
  }
};

// --- scenario ----------------------------------------------------------------

struct ScenarioCmd {
  std::optional<double> n_atoms, wavelength, omega_s, g0, kappa, detuning, nbar, mass, hbar;
  bool alpha_s_from_physics = false;
  bool no_simulate = false;
  bool expect_stable = false;
  std::optional<std::string> out_prefix;
  ParamFlags params;
  SimFlags sim;

  int run(std::ostream& out, std::optional<int> env_threads) const {
    const std::string started = config::utc_timestamp();
    PhysicalScenario phys;
    auto set = [](double& slot, const std::optional<double>& v) {
      if (v) slot = *v;
    };
    set(phys.n_atoms, n_atoms);
    set(phys.wavelength, wavelength);
    set(phys.omega_s, omega_s);
    set(phys.g0, g0);
    set(phys.kappa, kappa);
    set(phys.detuning, detuning);
    set(phys.nbar, nbar);
    set(phys.mass, mass);
    set(phys.hbar, hbar);
    const BecMeasurement bec = bec_measurement_strength(phys);
    if (!(bec.alpha_s > 0.0)) throw ValidationError("alpha_s", "measurement strength nonpositive (nbar = 0?)");

    // The separated configuration: weaker, less efficient, mistuned and
    // noisy filter with a small delay; the system at its quoted strength.
    json defaults{{"alpha_s", alpha_s_from_physics ? bec.alpha_s : 0.1},
                  {"eta_s", 0.16},
                  {"alpha_f", 0.05},
                  {"eta_f", 0.08},
                  {"d_omega_f", 1.0},
                  {"nu", 10.0},
                  {"tau", 0.1}};
    const ModelParams sep = validate_plant(config::params_from_json(params.merge(defaults)));
    const ModelParams ident = ModelParams::matched(sep.alpha_s, sep.eta_s);
    const IdenticalCase base = IdenticalCase::from_system(sep);
    const StabilityReport r_sep = classify(sep, base);
    const StabilityReport r_id = classify(ident, base);

    json sim_defaults{{"dt", 0.05},
                      {"t_final", 500.0},
                      {"n_paths", 2000},
                      {"record_stride", 100},
                      {"variance_mode", "integrate"},
                      {"filter_v0", {{"v_xx", 2.0}, {"v_xp", 0.25}, {"v_pp", 1.0}}},
                      {"system_v0", {{"v_xx", 2.0}, {"v_xp", 0.25}, {"v_pp", 1.0}}}};
    SimConfig s = config::sim_from_json(sim.merge(sim_defaults));
    if (!sim.threads && env_threads) s.threads = *env_threads;
    const MeanPair start{2.0, 1.0, 2.0, 1.0};

    std::optional<TrajectoryStats> st_sep, st_id;
    if (!no_simulate) {
      validate(s, sep);
      st_id = simulate_means(ident, s, start, base);
      st_sep = simulate_means(sep, s, start, base);
    }

    out << "cavity BEC measurement\n";
    row(out, "alpha_S (computed)", h6(bec.alpha_s));
    row(out, "alpha_S (used)", h6(sep.alpha_s));
    row(out, "x_HO [m]", h6(bec.x_ho));
    row(out, "k0 [1/m]", h6(bec.k0));
    row(out, "hbar [J s]", h6(phys.hbar));
    row(out, "mass [kg]", h6(phys.mass));
    out << "\n  " << std::left << std::setw(22) << "" << std::setw(14) << "identical" << "separated\n";
    auto pair_row = [&](const std::string& label, const std::string& a, const std::string& b) {
      out << "  " << std::left << std::setw(22) << label << std::setw(14) << a << b << '\n';
    };
    pair_row("stability", to_string(r_id.stability), to_string(r_sep.stability));
    pair_row("k", h6(ident.k), h6(sep.k));
    pair_row("E_inf", h6(r_id.e_inf_rho), h6(r_sep.e_inf_rho));
    pair_row("rate r", h6(r_id.rate_r), h6(r_sep.rate_r));
    if (st_id && st_sep) {
      pair_row("E(t_final), simulated", h6(st_id->mean_energy.back()), h6(st_sep->mean_energy.back()));
      pair_row("standard error", h6(st_id->std_error.back()), h6(st_sep->std_error.back()));
    }
    out << '\n';
    row(out, "E_inf_0 (baseline)", h6(r_sep.e_inf_0));
    row(out, "r0 (baseline)", h6(r_sep.r0));
    row(out, "energy ratio", h6(r_sep.energy_ratio));
    row(out, "rate ratio r0/r", h6(r_sep.rate_ratio));

    const json resolved{{"physical", config::to_json(phys)},
                        {"alpha_s_from_physics", alpha_s_from_physics},
                        {"params", config::to_json(sep)},
                        {"sim", config::to_json(s)},
                        {"simulate", !no_simulate}};
    const json results{{"alpha_s_computed", bec.alpha_s},
                       {"x_ho", bec.x_ho},
                       {"k0", bec.k0},
                       {"identical", config::to_json(r_id)},
                       {"separated", config::to_json(r_sep)}};
    if (out_prefix) {
      const fs::path prefix(*out_prefix);
      ensure_parent(prefix);
      config::RunManifest m;
      m.command = "scenario";
      m.config = resolved;
      m.seed = s.seed;
      m.method = no_simulate ? "analytic" : "analytic+numeric";
      m.results = results;
      if (st_id && st_sep) {
        const fs::path a = with_suffix(prefix, "_identical.csv");
        const fs::path b = with_suffix(prefix, "_separated.csv");
        write_energy_csv(a, *st_id);
        write_energy_csv(b, *st_sep);
        m.files = {a.string(), b.string()};
      }
      m.started = started;
      m.finished = config::utc_timestamp();
      const fs::path man = with_suffix(prefix, ".manifest.json");
      config::write_json(man, config::to_json(m));
      row(out, "manifest", man.string());
    }
    if (st_sep && (st_sep->diverged || st_id->diverged)) return expect_stable ? kExitDiverged : kExitUnstable;
    return exit_for(r_sep.stability);
  }
};

std::optional<int> threads_from_env() {
  const char* v = std::getenv("OSC_THREADS");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 4096) throw ValidationError("OSC_THREADS", "expected a positive integer");
  return static_cast<int>(n);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feedback cooling of a measured oscillator with a mismatched estimator", "osc"};
  app.set_version_flag("--version", OSC_VERSION);
  app.require_subcommand(1);

  ReportCmd report;
  auto* rep = app.add_subcommand("report", "stability, steady energy and rates at one parameter point");
  rep->add_option("--config", report.config_path, "JSON file with \"params\" and \"baseline\"");
  rep->add_option("--baseline", report.baseline, "identical case to compare with: filter or system")
      ->check(CLI::IsMember({"filter", "system"}));
  rep->add_flag("--json", report.as_json, "machine-readable output");
  rep->add_option("--output", report.output, "also write a manifest with the report to this file");
  report.params.attach(*rep);

  SweepCmd sweep;
  auto* swp = app.add_subcommand("sweep", "stability and ratio maps over one or two parameters");
  swp->add_option("--spec", sweep.spec_path, "sweep spec (JSON)")->required();
  swp->add_option("--out", sweep.out_prefix, "output prefix for .csv, .json and .manifest.json");
  swp->add_option("--threads", sweep.threads, "worker threads");
  swp->add_option("--method", sweep.method, "analytic or numeric")->check(CLI::IsMember({"analytic", "numeric"}));

  SimulateCmd simulate;
  auto* sim = app.add_subcommand("simulate", "ensemble energy time series");
  sim->add_option("--config", simulate.config_path, "JSON with params, sim, x0, baseline, expect_stable");
  sim->add_option("--baseline", simulate.baseline, "identical case for the divergence scale")
      ->check(CLI::IsMember({"filter", "system"}));
  sim->add_option("--out", simulate.out_prefix, "output prefix for .csv and .manifest.json");
  sim->add_option("--x0", simulate.x0, "initial means x_pi,p_pi,x_rho,p_rho")->expected(4)->delimiter(',');
  sim->add_flag("--expect-stable", simulate.expect_stable, "exit 3 if any path diverges");
  simulate.params.attach(*sim);
  simulate.sim.attach(*sim);

  ScenarioCmd scenario;
  auto* scn = app.add_subcommand("scenario", "cavity BEC example: identical vs separated filter");
  scn->add_option("--n-atoms", scenario.n_atoms, "atom number");
  scn->add_option("--wavelength", scenario.wavelength, "probe wavelength [m]");
  scn->add_option("--omega-s", scenario.omega_s, "trap frequency [rad/s]");
  scn->add_option("--g0", scenario.g0, "single-atom coupling [rad/s]");
  scn->add_option("--kappa", scenario.kappa, "cavity linewidth [rad/s]");
  scn->add_option("--detuning", scenario.detuning, "atom-probe detuning [rad/s]");
  scn->add_option("--nbar", scenario.nbar, "intracavity photon number");
  scn->add_option("--mass", scenario.mass, "atomic mass [kg]");
  scn->add_option("--hbar", scenario.hbar, "reduced Planck constant [J s]");
  scn->add_flag("--alpha-s-from-physics", scenario.alpha_s_from_physics,
                "use the computed alpha_S instead of the quoted 0.1");
  scn->add_flag("--no-simulate", scenario.no_simulate, "analytic comparison only");
  scn->add_flag("--expect-stable", scenario.expect_stable, "exit 3 if any path diverges");
  scn->add_option("--out", scenario.out_prefix, "write CSVs and a manifest with this prefix");
  scenario.params.attach(*scn);
  scenario.sim.attach(*scn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    const std::optional<int> env_threads = threads_from_env();
    if (env_threads) omp_set_num_threads(*env_threads);
    if (rep->parsed()) return report.run(out);
    if (swp->parsed()) return sweep.run(out);
    if (sim->parsed()) return simulate.run(out, env_threads);
    if (scn->parsed()) return scenario.run(out, env_threads);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const config::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace osc
