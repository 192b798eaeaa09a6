#pragma once

// Scenario files: JSON documents with shell, ada, sim, gs, users, random_users
// and mechanisms sections. Relative paths resolve against the file's directory.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "satmm/simulator.hpp"

namespace satmm {

// Carries every problem found, not just the first.
class ScenarioFileError : public std::runtime_error {
 public:
  explicit ScenarioFileError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct LoadedScenario {
  Scenario scenario;  // mechanism set to the first listed
  std::vector<MechanismKind> mechanisms;
};

// Rows of `epoch_seconds, lat_deg, lon_deg, alt_m`; an optional header and
// `#` comments are skipped. Times are rebased so the first row is t = 0.
std::vector<Waypoint> read_trace(const std::filesystem::path& path);

// Rows of `id, name, lat_deg, lon_deg[, server_latency_ms]`.
std::vector<GroundStation> read_ground_stations(const std::filesystem::path& path, double default_server_ms);

LoadedScenario load_scenario(const std::filesystem::path& path);
LoadedScenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
LoadedScenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir);

// Self-contained form: defaults materialised, traces and GS list inlined.
nlohmann::json to_json(const Scenario& scenario, const std::vector<MechanismKind>& mechanisms);

// Stable digest of everything except the mechanism choice.
std::string scenario_fingerprint(const Scenario& scenario);

}  // namespace satmm
