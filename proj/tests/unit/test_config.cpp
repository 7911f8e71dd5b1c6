#include <fstream>

#include "doctest.h"
#include "osc/config.hpp"
#include "scratch_dir.hpp"

using namespace osc;
using namespace osc::config;

TEST_CASE("model parameters round-trip") {
  ModelParams p;
  p.alpha_s = 0.123456789012345;
  p.eta_s = 0.9;
  p.alpha_f = 1.0 / 3.0;
  p.eta_f = 0.2;
  p.d_omega_f = -0.25;
  p.nu = 7.5;
  p.tau = 0.1;
  p.k = -2.0;
  CHECK(params_from_json(json::parse(to_json(p).dump())) == p);
}

TEST_CASE("parameter shorthands") {
  ModelParams p = params_from_json(json{{"alpha", 0.5}, {"eta", 0.4}, {"k", "k_opt"}});
  CHECK(p.alpha_f == 0.5);
  CHECK(p.alpha_s == 0.5);
  CHECK(p.eta_s == 0.4);
  CHECK(p.k == doctest::Approx(k_opt(0.5, 0.4)));
  // the specific key beats the shorthand
  p = params_from_json(json{{"alpha", 0.5}, {"alpha_s", 0.2}});
  CHECK(p.alpha_f == 0.5);
  CHECK(p.alpha_s == 0.2);
  // k_opt uses the filter side, whatever the key order
  p = params_from_json(json{{"k", "k_opt"}, {"alpha_f", 2.0}, {"d_omega_f", 0.5}});
  CHECK(p.k == doctest::Approx(k_opt(2.0, p.eta_f, 0.5)));
}

TEST_CASE("parameter errors") {
  CHECK_THROWS_AS(params_from_json(json{{"alpah", 0.1}}), ValidationError);
  CHECK_THROWS_AS(params_from_json(json{{"alpha", "big"}}), ValidationError);
  CHECK_THROWS_AS(params_from_json(json{{"k", "best"}}), ValidationError);
  CHECK_THROWS_AS(params_from_json(json::array()), ValidationError);
}

TEST_CASE("simulation config round-trip") {
  SimConfig s;
  s.dt = 0.05;
  s.t_final = 123.0;
  s.n_paths = 99;
  s.seed = 18446744073709551615ull;
  s.record_stride = 3;
  s.variance_mode = VarianceMode::integrate;
  s.filter_v0 = CovMatrix{2.0, 0.25, 1.0};
  s.threads = 2;
  CHECK(sim_from_json(json::parse(to_json(s).dump())) == s);
  CHECK_THROWS_AS(sim_from_json(json{{"n_paths", -1}}), ValidationError);
  CHECK_THROWS_AS(sim_from_json(json{{"n_paths", 1.5}}), ValidationError);
  CHECK_THROWS_AS(sim_from_json(json{{"variance_mode", "euler"}}), ValidationError);
  CHECK_THROWS_AS(sim_from_json(json{{"filter_v0", {{"v_xx", 1.0}}}}), ValidationError);
  CHECK_THROWS_AS(sim_from_json(json{{"steps", 10}}), ValidationError);
}

TEST_CASE("sweep spec round-trip") {
  SweepSpec s;
  s.axes = {Axis{"alpha_f", 0.05, 5.0, 17, Spacing::log}, Axis{"tau", 0.0, 1.0, 11, Spacing::linear}};
  s.fixed = ModelParams::matched(1.0, 1.0);
  s.fixed.nu = 3.0;
  s.method = Method::numeric;
  s.sim.t_final = 20.0;
  s.k_rule = KRule::explicit_value;
  s.baseline = BaselineRule::system;
  s.threads = 2;
  CHECK(sweep_from_json(json::parse(to_json(s).dump())) == s);

  const SweepSpec k = sweep_from_json(json{{"axes", json::array({{{"name", "nu"}, {"min", 0}, {"max", 1}, {"n_points", 2}}})},
                                           {"k_rule", 1.7}});
  CHECK(k.k_rule == KRule::explicit_value);
  CHECK(k.fixed.k == 1.7);
  CHECK(k.axes[0].spacing == Spacing::linear);
  CHECK_THROWS_AS(sweep_from_json(json{{"axes", json::array({{{"name", "nu"}, {"min", 0}}})}}), ValidationError);
  CHECK_THROWS_AS(sweep_from_json(json{{"method", "monte_carlo"}}), ValidationError);
  CHECK_THROWS_AS(sweep_from_json(json{{"axes", {{"name", "nu"}}}}), ValidationError);
}

TEST_CASE("physical scenario round-trip") {
  PhysicalScenario s;
  s.nbar = 0.4;
  s.mass = 1e-25;
  const PhysicalScenario back = scenario_from_json(json::parse(to_json(s).dump()));
  CHECK(back.nbar == s.nbar);
  CHECK(back.mass == s.mass);
  CHECK(back.detuning == s.detuning);
}

TEST_CASE("report serialisation keeps absent values null") {
  ModelParams p = ModelParams::matched(0.1, 0.16);
  p.k = -1.0;
  const json j = to_json(classify(p));
  CHECK(j["stability"] == "unstable");
  CHECK(j["energy_ratio"].is_null());
  CHECK(j["v_inf"].is_null());
  const json s = to_json(classify(ModelParams::matched(0.1, 0.16)));
  CHECK(s["v_inf"].size() == 10);
  CHECK(s["energy_ratio"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("doubles survive the text form exactly") {
  const double x = 0.1 + 0.2;
  CHECK(json::parse(json(x).dump()).get<double>() == x);
}

TEST_CASE("manifests and files") {
  ScratchDir dir;
  RunManifest m;
  m.command = "report";
  m.config = json{{"params", to_json(ModelParams{})}};
  m.seed = 42;
  m.started = m.finished = utc_timestamp();
  write_json(dir / "m.json", to_json(m));
  const json back = load_config(dir / "m.json");
  CHECK(back == m.config);
  CHECK(m.version == OSC_VERSION);
  CHECK(m.started.size() == 20);
  CHECK(m.started.back() == 'Z');

  write_json(dir / "plain.json", json{{"params", {{"nu", 1.0}}}});
  CHECK(load_config(dir / "plain.json")["params"]["nu"] == 1.0);

  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ValidationError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ValidationError);
}
