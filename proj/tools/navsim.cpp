#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridnav/errors.hpp"
#include "hybridnav/metrics.hpp"
#include "hybridnav/scenario.hpp"
#include "hybridnav/sensor.hpp"

namespace {

using namespace hybridnav;

constexpr int kExitConverged = 0;
constexpr int kExitTimeout = 1;
constexpr int kExitFault = 2;
constexpr int kExitConfig = 3;

struct Overrides {
  std::optional<double> dt, t_max, gamma, epsilon, e_c;
  std::optional<double> sensor_range, sensor_resolution, margin;
  std::optional<int> jump_budget;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> variants;
};

void add_override_flags(CLI::App* app, Overrides& ov) {
  app->add_option("--dt", ov.dt, "integration step override");
  app->add_option("--t-max", ov.t_max, "time horizon override");
  app->add_option("--seed", ov.seed, "seed override");
  app->add_option("--gamma", ov.gamma, "nominal gain override");
  app->add_option("--epsilon", ov.epsilon, "blend width override");
  app->add_option("--e-c", ov.e_c, "convergence radius override");
  app->add_option("--jump-budget", ov.jump_budget, "jump budget override");
  app->add_option("--sensor-range", ov.sensor_range, "sensor range override");
  app->add_option("--sensor-resolution", ov.sensor_resolution, "azimuth resolution override (deg)");
  app->add_option("--margin", ov.margin, "sensor dilation margin override");
  app->add_option("--variant", ov.variants, "variant(s) to run instead of the scenario's list");
}

void apply_overrides(Scenario& s, const Overrides& ov) {
  if (ov.dt) s.dt = *ov.dt;
  if (ov.t_max) s.t_max = *ov.t_max;
  if (ov.seed) s.seed = *ov.seed;
  if (ov.gamma) s.params.gamma = *ov.gamma;
  if (ov.epsilon) s.params.blend_width = *ov.epsilon;
  if (ov.e_c) s.params.convergence_radius = *ov.e_c;
  if (ov.jump_budget) s.jump_budget = *ov.jump_budget;
  if (ov.sensor_range) s.sensor_cfg.range = *ov.sensor_range;
  if (ov.sensor_resolution) s.sensor_cfg.azimuth_step_deg = *ov.sensor_resolution;
  if (ov.margin) s.sensor_cfg.margin = *ov.margin;
  if (!ov.variants.empty()) s.variants = ov.variants;
  if (!(s.dt > 0.0) || !(s.t_max > 0.0)) throw ParameterError("dt and t_max must be positive");
  const int min_budget = 2 * static_cast<int>(s.obstacles.size()) + 2;
  if (s.jump_budget < min_budget) {
    throw ParameterError("jump_budget must be at least " + std::to_string(min_budget));
  }
}

std::string run_tag(const Scenario& s, const std::string& variant, std::size_t start) {
  return s.name + "_" + variant + "_start" + std::to_string(start);
}

int outcome_exit(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Converged: return kExitConverged;
    case OutcomeKind::Timeout: return kExitTimeout;
    default: return kExitFault;
  }
}

struct RunArtifacts {
  RunMetrics metrics;
  double wall_ms = 0.0;
};

RunArtifacts execute_and_write(const Scenario& s, const Workspace& ws, const Vec& x0,
                               const std::string& variant, std::size_t start_index,
                               const std::filesystem::path& out_dir) {
  const RunConfig cfg = variant_config(s, variant);
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult result = run(ws, x0, cfg);
  const auto t1 = std::chrono::steady_clock::now();

  RunArtifacts art;
  art.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  art.metrics = compute_metrics(result, ws.target());

  std::filesystem::create_directories(out_dir);
  const std::string tag = run_tag(s, variant, start_index);
  {
    std::ofstream csv(out_dir / (tag + ".csv"));
    write_trajectory_csv(csv, result.trajectory, ws.dimension(), cfg.drive.has_value());
  }
  {
    std::ofstream met(out_dir / (tag + ".metrics"));
    met << "scenario " << s.name << '\n';
    met << "variant " << variant << '\n';
    met << "start_index " << start_index << '\n';
    met << "seed " << s.seed << '\n';
    write_metrics(met, art.metrics);
    if (!s.defaulted.empty()) {
      met << "defaulted";
      for (const std::string& d : s.defaulted) met << ' ' << d;
      met << '\n';
    }
  }
  return art;
}

int cmd_validate(const std::string& path, const Overrides& ov) {
  Scenario s = load_scenario(path);
  apply_overrides(s, ov);
  make_workspace(s);  // re-validates after overrides
  std::cout << "valid: " << s.name << " (" << s.dimension << "-D, "
            << s.obstacles.size() << " obstacles, " << s.variants.size() << " variant(s))\n";
  if (!s.defaulted.empty()) {
    std::cout << "defaulted:";
    for (const std::string& d : s.defaulted) std::cout << ' ' << d;
    std::cout << '\n';
  }
  return kExitConverged;
}

int cmd_run(const std::string& path, const Overrides& ov, std::size_t start_index,
            const std::string& out_dir) {
  Scenario s = load_scenario(path);
  apply_overrides(s, ov);
  const Workspace ws = make_workspace(s);
  const std::vector<Vec> starts = scenario_starts(s, ws);
  if (start_index >= starts.size()) {
    throw ParameterError("start index " + std::to_string(start_index) + " out of range (" +
                         std::to_string(starts.size()) + " starts)");
  }
  const std::string variant = s.variants.front();
  const RunArtifacts art = execute_and_write(s, ws, starts[start_index], variant, start_index, out_dir);
  std::cout << run_tag(s, variant, start_index) << ": " << to_string(art.metrics.outcome)
            << " t=" << art.metrics.t_final << " jumps=" << art.metrics.jumps
            << " path=" << art.metrics.path_length
            << " min_clearance=" << art.metrics.min_clearance << " wall_ms=" << art.wall_ms
            << '\n';
  if (!art.metrics.detail.empty()) std::cout << "  detail: " << art.metrics.detail << '\n';
  return outcome_exit(art.metrics.outcome);
}

int cmd_suite(const std::string& path, const Overrides& ov, const std::string& out_dir) {
  Scenario s = load_scenario(path);
  apply_overrides(s, ov);
  const Workspace ws = make_workspace(s);
  const std::vector<Vec> starts = scenario_starts(s, ws);

  std::filesystem::create_directories(out_dir);
  std::ofstream summary(std::filesystem::path(out_dir) / (s.name + "_summary.txt"));
  summary << "scenario " << s.name << '\n';
  summary << "seed " << s.seed << '\n';
  summary << "starts " << starts.size() << '\n';
  if (!s.defaulted.empty()) {
    summary << "defaulted";
    for (const std::string& d : s.defaulted) summary << ' ' << d;
    summary << '\n';
  }

  // path lengths per (variant, start) for the pairwise comparisons
  std::map<std::string, std::vector<double>> lengths;
  int exit_code = kExitConverged;
  double total_wall = 0.0;
  for (const std::string& variant : s.variants) {
    lengths[variant].assign(starts.size(), 0.0);
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const RunArtifacts art = execute_and_write(s, ws, starts[i], variant, i, out_dir);
      total_wall += art.wall_ms;
      lengths[variant][i] = art.metrics.path_length;
      char line[256];
      std::snprintf(line, sizeof line, "run %s outcome=%s t=%.6g jumps=%d path=%.9g min_clearance=%.6g",
                    run_tag(s, variant, i).c_str(), to_string(art.metrics.outcome),
                    art.metrics.t_final, art.metrics.jumps, art.metrics.path_length,
                    art.metrics.min_clearance);
      summary << line << '\n';
      std::cout << line << " wall_ms=" << art.wall_ms << '\n';
      exit_code = std::max(exit_code, outcome_exit(art.metrics.outcome));
    }
  }
  // relative length difference between variants on identical starts
  for (std::size_t a = 0; a < s.variants.size(); ++a) {
    for (std::size_t b = a + 1; b < s.variants.size(); ++b) {
      const std::vector<double>& la = lengths[s.variants[a]];
      const std::vector<double>& lb = lengths[s.variants[b]];
      for (std::size_t i = 0; i < starts.size(); ++i) {
        if (lb[i] <= 0.0) continue;
        char line[192];
        std::snprintf(line, sizeof line, "rld %s_vs_%s_start%zu %.9g", s.variants[a].c_str(),
                      s.variants[b].c_str(), i, 100.0 * (la[i] - lb[i]) / lb[i]);
        summary << line << '\n';
      }
    }
  }
  std::cout << "suite wall_ms=" << total_wall << '\n';
  return exit_code;
}

int cmd_scan_debug(const std::string& path, const Overrides& ov, std::size_t start_index,
                   std::vector<double> at, const std::string& out_file) {
  Scenario s = load_scenario(path);
  apply_overrides(s, ov);
  const Workspace ws = make_workspace(s);
  Vec x;
  if (!at.empty()) {
    if (static_cast<int>(at.size()) != s.dimension) {
      throw ParameterError("--at needs exactly " + std::to_string(s.dimension) + " coordinates");
    }
    x = Eigen::Map<Vec>(at.data(), static_cast<Eigen::Index>(at.size()));
  } else {
    const std::vector<Vec> starts = scenario_starts(s, ws);
    if (start_index >= starts.size()) {
      throw ParameterError("start index out of range");
    }
    x = starts[start_index];
  }

  const Scan scan = scan_environment(ws, x, s.sensor_cfg);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_file.empty()) {
    file.open(out_file);
    if (!file) throw ParameterError("cannot open output file " + out_file);
    os = &file;
  }
  if (scan.n_polar == 1) {
    *os << "azimuth_deg,range,hit\n";
  } else {
    *os << "polar_deg,azimuth_deg,range,hit\n";
  }
  for (int ip = 0; ip < scan.n_polar; ++ip) {
    for (int ia = 0; ia < scan.n_azimuth; ++ia) {
      const ScanPoint& p = scan.at(ip, ia);
      char line[128];
      if (scan.n_polar == 1) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%d", ia * s.sensor_cfg.azimuth_step_deg,
                      p.range, p.hit ? 1 : 0);
      } else {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%d", ip * s.sensor_cfg.polar_step_deg,
                      ia * s.sensor_cfg.azimuth_step_deg, p.range, p.hit ? 1 : 0);
      }
      *os << line << '\n';
    }
  }

  const DetectionResult det = detect_obstacles(ws, x, s.sensor_cfg);
  std::cerr << "segments=" << det.segments_total << " dropped=" << det.segments_dropped << '\n';
  for (const Ball& b : det.obstacles) {
    std::cerr << "ball r=" << b.radius << " c=(";
    for (int i = 0; i < b.center.size(); ++i) std::cerr << (i ? "," : "") << b.center[i];
    std::cerr << ")\n";
  }
  return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid feedback navigation simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string scan_out;
  std::size_t start_index = 0;
  std::vector<double> at;
  Overrides ov;

  CLI::App* c_run = app.add_subcommand("run", "run one start of a scenario");
  c_run->add_option("scenario", scenario_path, "scenario file")->required();
  c_run->add_option("--start-index", start_index, "which start to run");
  c_run->add_option("--out-dir", out_dir, "output directory");
  add_override_flags(c_run, ov);

  CLI::App* c_suite = app.add_subcommand("suite", "run every variant on every start");
  c_suite->add_option("scenario", scenario_path, "scenario file")->required();
  c_suite->add_option("--out-dir", out_dir, "output directory");
  add_override_flags(c_suite, ov);

  CLI::App* c_validate = app.add_subcommand("validate", "parse and validate a scenario");
  c_validate->add_option("scenario", scenario_path, "scenario file")->required();
  add_override_flags(c_validate, ov);

  CLI::App* c_scan = app.add_subcommand("scan-debug", "dump one range scan and its reconstruction");
  c_scan->add_option("scenario", scenario_path, "scenario file")->required();
  c_scan->add_option("--start-index", start_index, "scan from this start");
  c_scan->add_option("--at", at, "scan from these coordinates instead");
  c_scan->add_option("--out", scan_out, "write the beam table here instead of stdout");
  add_override_flags(c_scan, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c_run)) return cmd_run(scenario_path, ov, start_index, out_dir);
    if (app.got_subcommand(c_suite)) return cmd_suite(scenario_path, ov, out_dir);
    if (app.got_subcommand(c_validate)) return cmd_validate(scenario_path, ov);
    if (app.got_subcommand(c_scan)) return cmd_scan_debug(scenario_path, ov, start_index, at, scan_out);
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario:\n" << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
