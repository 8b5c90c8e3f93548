#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybridnav/executor.hpp"
#include "hybridnav/workspace.hpp"

namespace hybridnav {

/// A parsed scenario file: world description, starts, run settings, and the
/// variants (controller configurations) to execute.
struct Scenario {
  std::string name = "scenario";
  int dimension = 2;
  std::uint64_t seed = 1;
  Vec target;
  std::vector<Vec> starts;
  int random_starts = 0;
  std::vector<Ball> obstacles;
  WorkspaceParams params;
  double dt = 1e-3;
  double t_max = 60.0;
  int jump_budget = 0;  // 0 means "derive as 2b + 2"
  bool guarded_mode_map = true;
  bool closest_vd_map = true;
  ScanConfig sensor_cfg;
  DriveParams drive_cfg;
  std::vector<std::string> variants;   // known | sensor | unicycle | sensor-unicycle
  std::vector<std::string> defaulted;  // keys that kept their default value
};

/// Parses and validates a scenario file.  Throws ParameterError with
/// `path:line:` context on malformed input and ValidationError when the
/// world or the starts are inadmissible.
Scenario load_scenario(const std::string& path);

/// Same parser over an in-memory document (used by tests).
Scenario parse_scenario(const std::string& text, const std::string& origin = "<memory>");

/// Builds the validated true workspace of a scenario.
Workspace make_workspace(const Scenario& s);

/// Explicit starts followed by `random_starts` sampled free points
/// (deterministic in the scenario seed).
std::vector<Vec> scenario_starts(const Scenario& s, const Workspace& ws);

/// Maps a variant token to a run configuration.
RunConfig variant_config(const Scenario& s, const std::string& variant);

}  // namespace hybridnav
