#pragma once

// JSON forms of the configuration and result types, and the run manifest
// written next to every output file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "osc/analytic.hpp"
#include "osc/core.hpp"
#include "osc/sde.hpp"
#include "osc/sweep.hpp"

namespace osc::config {

using json = nlohmann::json;

// Every *_from_json overlays the keys present in `j` on `base`, rejecting
// unknown keys and wrongly typed values with ValidationError.

json to_json(const ModelParams& p);
/// "k" may also be the string "k_opt" (gain from the filter parameters).
ModelParams params_from_json(const json& j, ModelParams base = {});

json to_json(const CovMatrix& v);
CovMatrix cov_from_json(const json& j, const std::string& field);

json to_json(const MeanPair& x);
MeanPair means_from_json(const json& j, MeanPair base = {});

json to_json(const SimConfig& s);
SimConfig sim_from_json(const json& j, SimConfig base = {});

json to_json(const Axis& a);
Axis axis_from_json(const json& j);

json to_json(const SweepSpec& s);
SweepSpec sweep_from_json(const json& j, SweepSpec base = {});

json to_json(const PhysicalScenario& s);
PhysicalScenario scenario_from_json(const json& j, PhysicalScenario base = {});

json to_json(const StabilityReport& r);
json to_json(const ZeroMeanConditions& z);
json to_json(const SweepResult& r);

struct RunManifest {
  std::string version = OSC_VERSION;
  std::string command;
  json config;  ///< fully resolved; feeding it back reproduces the run
  std::uint64_t seed = 0;
  std::string method;
  std::vector<std::string> files;
  json results;  ///< headline numbers, e.g. the analytic steady energy
  std::string started;
  std::string finished;
};

json to_json(const RunManifest& m);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

/// Parses a file. A manifest is accepted in place of a plain config and
/// yields its "config" member.
json load_config(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const json& j);

}  // namespace osc::config
