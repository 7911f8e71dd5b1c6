#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "osc/cli.hpp"
#include "osc/config.hpp"
#include "scratch_dir.hpp"

using namespace osc;
using config::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "osc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

void write(const std::string& path, const json& j) { std::ofstream(path) << j.dump(2); }

}  // namespace

TEST_CASE("report exit codes") {
  Run r = run({"report", "--alpha", "0.1", "--eta", "0.16"});
  CHECK(r.code == 0);
  CHECK(r.out.find("stable") != std::string::npos);
  CHECK(r.out.find("energy ratio          1\n") != std::string::npos);

  CHECK(run({"report", "--k", "-1"}).code == 1);
  r = run({"report", "--eta", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("eta") != std::string::npos);
  CHECK(run({"report", "--no-such-flag"}).code == 2);
  CHECK(run({"report", "--k", "fast"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"report", "--config", "/nonexistent/file.json"}).code == 2);
}

TEST_CASE("report on the separated scenario") {
  Run r = run({"report", "--json", "--alpha-f", "0.05", "--alpha-s", "0.1", "--eta-f", "0.08", "--eta-s", "0.16",
               "--d-omega-f", "1", "--nu", "10", "--tau", "0.1", "--baseline", "system"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["report"]["energy_ratio"].get<double>() == doctest::Approx(4.2).epsilon(0.15));
  CHECK(j["report"]["first_order_delay"] == true);
  CHECK(j["config"]["baseline"] == "system");
  CHECK(j["config"]["params"]["k"].get<double>() == doctest::Approx(k_opt(0.05, 0.08, 1.0)));
  CHECK(j["zero_mean"]["degenerate_k"] == false);
}

TEST_CASE("report config file, flags win") {
  ScratchDir dir;
  write(dir / "c.json", {{"params", {{"alpha_f", 0.3}, {"alpha_s", 0.4}, {"k", 1.5}}}, {"baseline", "system"}});
  Run r = run({"report", "--json", "--config", dir / "c.json"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["config"]["params"]["alpha_f"] == 0.3);
  CHECK(j["config"]["params"]["k"] == 1.5);
  r = run({"report", "--json", "--config", dir / "c.json", "--alpha", "0.2", "--k", "opt", "--baseline", "filter"});
  j = json::parse(r.out);
  CHECK(j["config"]["params"]["alpha_f"] == 0.2);
  CHECK(j["config"]["params"]["alpha_s"] == 0.2);
  CHECK(j["config"]["params"]["k"].get<double>() == doctest::Approx(k_opt(0.2, 0.16)));
  CHECK(j["config"]["baseline"] == "filter");

  write(dir / "bad.json", {{"params", {{"alpha", 0.1}}}, {"colour", "red"}});
  CHECK(run({"report", "--config", dir / "bad.json"}).code == 2);

  // the manifest re-parses to the same resolved configuration
  r = run({"report", "--config", dir / "c.json", "--output", dir / "out/report.json"});
  REQUIRE(r.code == 0);
  const json m = read_json(dir / "out/report.json");
  CHECK(m["command"] == "report");
  CHECK(m["version"] == OSC_VERSION);
  Run again = run({"report", "--json", "--config", dir / "out/report.json"});
  CHECK(json::parse(again.out)["config"] == m["config"]);
  CHECK(json::parse(again.out)["report"] == m["results"]["report"]);
}

TEST_CASE("sweep command") {
  ScratchDir dir;
  write(dir / "nu.json", {{"axes", {{{"name", "nu"}, {"min", 0}, {"max", 100}, {"n_points", 11}}}},
                          {"fixed", {{"alpha", 1.0}, {"eta", 1.0}}}});
  Run r = run({"sweep", "--spec", dir / "nu.json", "--out", dir / "maps/nu"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "maps/nu.csv");
  CHECK(csv.rfind("axis1,axis2,stable,energy_ratio,rate_ratio,max_re_lambda,error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
  CHECK(csv.find("unstable") == std::string::npos);
  const json res = read_json(dir / "maps/nu.json");
  CHECK(res["result"]["points"].size() == 11);
  CHECK(res["version"] == OSC_VERSION);
  const json man = read_json(dir / "maps/nu.manifest.json");
  CHECK(man["results"]["stable"] == 11);
  CHECK(man["files"].size() == 2);

  // rerunning from the manifest reproduces the CSV byte for byte
  r = run({"sweep", "--spec", dir / "maps/nu.manifest.json", "--out", dir / "again"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "again.csv") == csv);

  write(dir / "empty.json", {{"axes", json::array()}});
  CHECK(run({"sweep", "--spec", dir / "empty.json", "--out", dir / "x"}).code == 2);
  write(dir / "typo.json", {{"axes", {{{"name", "nu"}, {"min", 0}, {"max", 1}, {"n_points", 2}, {"step", 1}}}}});
  CHECK(run({"sweep", "--spec", dir / "typo.json", "--out", dir / "x"}).code == 2);
  CHECK(run({"sweep"}).code == 2);

  // single point
  write(dir / "one.json", {{"axes", {{{"name", "alpha"}, {"min", 0.1}, {"max", 0.1}, {"n_points", 1}}}},
                           {"fixed", {{"eta", 0.16}}}});
  REQUIRE(run({"sweep", "--spec", dir / "one.json", "--out", dir / "one"}).code == 0);
  const json one = read_json(dir / "one.json");
  CHECK(one["result"]["points"][0]["energy_ratio"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("simulate command") {
  ScratchDir dir;
  const std::vector<std::string> base{"simulate", "--alpha", "0.5", "--eta", "0.5", "--dt", "0.05", "--t-final", "5",
                                      "--paths", "50", "--seed", "9", "--stride", "10"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  Run r = with({"--out", dir / "a"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "a.csv");
  CHECK(csv.rfind("t,mean_energy,std_error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);  // header + 11 samples
  const json m = read_json(dir / "a.manifest.json");
  CHECK(m["results"]["e_inf_analytic"].get<double>() == doctest::Approx(e_inf_identical(0.5, 0.5, k_opt(0.5, 0.5))));
  CHECK(m["seed"] == 9);

  // same seed, same CSV; manifest reproduces it
  REQUIRE(with({"--out", dir / "b"}).code == 0);
  CHECK(slurp(dir / "b.csv") == csv);
  REQUIRE(run({"simulate", "--config", dir / "a.manifest.json", "--out", dir / "c"}).code == 0);
  CHECK(slurp(dir / "c.csv") == csv);
  // thread count from the environment does not change the numbers
  setenv("OSC_THREADS", "3", 1);
  REQUIRE(with({"--out", dir / "d"}).code == 0);
  CHECK(slurp(dir / "d.csv") == csv);
  setenv("OSC_THREADS", "zero", 1);
  CHECK(with({"--out", dir / "e"}).code == 2);
  unsetenv("OSC_THREADS");

  // a different seed gives different numbers
  std::vector<std::string> other = base;
  other[other.size() - 3] = "10";  // --seed
  other.insert(other.end(), {"--out", dir / "f"});
  REQUIRE(run(other).code == 0);
  CHECK(slurp(dir / "f.csv") != csv);

  // divergence
  const std::vector<std::string> unstable{"simulate", "--k", "-1", "--dt", "0.05", "--t-final", "60",
                                          "--paths", "20", "--out", dir / "u"};
  CHECK(run(unstable).code == 1);
  std::vector<std::string> expect = unstable;
  expect.push_back("--expect-stable");
  CHECK(run(expect).code == 3);

  CHECK(with({"--dt", "0", "--out", dir / "g"}).code == 2);
  CHECK(with({"--tau", "0.07", "--out", dir / "g"}).code == 2);
  CHECK(with({"--x0", "1,2,3", "--out", dir / "g"}).code == 2);
  CHECK(with({"--variance-mode", "euler", "--out", dir / "g"}).code == 2);
  CHECK(with({"--v0", "1,2,1", "--variance-mode", "integrate", "--out", dir / "g"}).code == 2);
}

TEST_CASE("scenario command") {
  ScratchDir dir;
  Run r = run({"scenario", "--no-simulate", "--out", dir / "s"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("alpha_S (computed)") != std::string::npos);
  CHECK(r.out.find("hbar") != std::string::npos);
  const json m = read_json(dir / "s.manifest.json");
  CHECK(m["results"]["alpha_s_computed"].get<double>() == doctest::Approx(0.5289).epsilon(1e-3));
  CHECK(m["results"]["separated"]["energy_ratio"].get<double>() == doctest::Approx(4.2).epsilon(0.15));
  const double rr = m["results"]["separated"]["rate_ratio"].get<double>();
  CHECK(rr > 50.0);
  CHECK(rr < 200.0);
  CHECK(m["results"]["identical"]["energy_ratio"].get<double>() == doctest::Approx(1.0));

  // override to a matched filter
  r = run({"scenario", "--no-simulate", "--alpha", "0.1", "--eta", "0.16", "--d-omega-f", "0", "--nu", "0", "--tau",
           "0", "--out", dir / "m"});
  REQUIRE(r.code == 0);
  CHECK(read_json(dir / "m.manifest.json")["results"]["separated"]["energy_ratio"].get<double>() ==
        doctest::Approx(1.0).epsilon(1e-10));

  CHECK(run({"scenario", "--no-simulate", "--nbar", "0"}).code == 2);
  CHECK(run({"scenario", "--no-simulate", "--kappa", "-1"}).code == 2);

  // short simulated run writes both series
  r = run({"scenario", "--paths", "20", "--t-final", "5", "--out", dir / "sim"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "sim_identical.csv").rfind("t,mean_energy,std_error\n", 0) == 0);
  CHECK(slurp(dir / "sim_separated.csv").rfind("t,mean_energy,std_error\n", 0) == 0);
}

TEST_CASE("help and version") {
  Run r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(OSC_VERSION) != std::string::npos);
  r = run({"report", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("--baseline") != std::string::npos);
}
