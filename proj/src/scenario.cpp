#include "hybridnav/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hybridnav/errors.hpp"

namespace hybridnav {

namespace {

struct Line {
  int number = 0;
  std::string section;  // empty for the global scope
  std::string key;
  std::vector<std::string> values;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ParameterError(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const Line& ln, const std::string& origin, const std::string& tok) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(origin, ln.number, "expected a number, got '" + tok + "'");
  }
  if (pos != tok.size() || !std::isfinite(v)) {
    fail(origin, ln.number, "expected a finite number, got '" + tok + "'");
  }
  return v;
}

double one_double(const Line& ln, const std::string& origin) {
  if (ln.values.size() != 1) fail(origin, ln.number, "'" + ln.key + "' takes one value");
  return to_double(ln, origin, ln.values[0]);
}

int one_int(const Line& ln, const std::string& origin) {
  const double v = one_double(ln, origin);
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 0.0) fail(origin, ln.number, "'" + ln.key + "' takes an integer");
  return i;
}

bool one_bool(const Line& ln, const std::string& origin) {
  if (ln.values.size() != 1) fail(origin, ln.number, "'" + ln.key + "' takes one value");
  const std::string& t = ln.values[0];
  if (t == "1" || t == "true" || t == "on") return true;
  if (t == "0" || t == "false" || t == "off") return false;
  fail(origin, ln.number, "'" + ln.key + "' takes true/false");
}

Vec vector_value(const Line& ln, const std::string& origin, int expect) {
  if (static_cast<int>(ln.values.size()) != expect) {
    fail(origin, ln.number,
         "'" + ln.key + "' takes " + std::to_string(expect) + " numbers");
  }
  Vec v(expect);
  for (int i = 0; i < expect; ++i) v[i] = to_double(ln, origin, ln.values[i]);
  return v;
}

std::vector<Line> tokenize(const std::string& text, const std::string& origin) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) {
      if (t != "=") toks.push_back(t);
    }
    if (toks.empty()) continue;
    if (toks[0].front() == '[') {
      if (toks.size() != 1 || toks[0].back() != ']') {
        fail(origin, number, "malformed section header");
      }
      section = toks[0].substr(1, toks[0].size() - 2);
      continue;
    }
    Line ln;
    ln.number = number;
    ln.section = section;
    ln.key = toks[0];
    // strip a trailing '=' glued to the key ("dt= 0.001")
    if (!ln.key.empty() && ln.key.back() == '=') ln.key.pop_back();
    ln.values.assign(toks.begin() + 1, toks.end());
    // values glued to '=' ("dt =0.001" was split already; "dt=0.001" was not)
    if (ln.values.empty()) {
      const std::size_t eq = ln.key.find('=');
      if (eq != std::string::npos) {
        ln.values.push_back(ln.key.substr(eq + 1));
        ln.key.erase(eq);
      }
    }
    if (ln.key.empty()) fail(origin, number, "missing key");
    lines.push_back(std::move(ln));
  }
  return lines;
}

const std::set<std::string> kVariants = {"known", "sensor", "unicycle", "sensor-unicycle"};

// Every defaultable key, used to echo which ones the file left untouched.
const std::vector<std::string> kDefaultable = {
    "seed",          "random_starts", "variants",        "controller.gamma",
    "controller.epsilon", "controller.active_range_factor", "controller.vd_distance_factor",
    "controller.aperture_factor", "controller.guarded_mode_map", "controller.closest_vd_map",
    "run.dt",        "run.t_max",     "run.e_c",         "run.jump_budget",
    "sensor.range",  "sensor.resolution_deg", "sensor.polar_resolution_deg",
    "sensor.margin", "sensor.gap_factor", "sensor.symmetry_tol",
    "drive.v_max",   "drive.omega_max", "drive.k_v",     "drive.p",
    "drive.heading0_deg"};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario s;
  std::set<std::string> seen;
  bool has_target = false;

  for (const Line& ln : tokenize(text, origin)) {
    const std::string scoped = ln.section.empty() ? ln.key : ln.section + "." + ln.key;
    seen.insert(scoped);
    if (ln.section.empty()) {
      if (ln.key == "name") {
        if (ln.values.size() != 1) fail(origin, ln.number, "'name' takes one token");
        s.name = ln.values[0];
      } else if (ln.key == "dimension") {
        s.dimension = one_int(ln, origin);
        if (s.dimension < 2) fail(origin, ln.number, "dimension must be at least 2");
      } else if (ln.key == "seed") {
        s.seed = static_cast<std::uint64_t>(one_double(ln, origin));
      } else if (ln.key == "target") {
        s.target = vector_value(ln, origin, s.dimension);
        has_target = true;
      } else if (ln.key == "start") {
        s.starts.push_back(vector_value(ln, origin, s.dimension));
      } else if (ln.key == "random_starts") {
        s.random_starts = one_int(ln, origin);
        if (s.random_starts < 0) fail(origin, ln.number, "random_starts must be >= 0");
      } else if (ln.key == "obstacle") {
        const Vec v = vector_value(ln, origin, s.dimension + 1);
        Ball b;
        b.center = v.head(s.dimension);
        b.radius = v[s.dimension];
        s.obstacles.push_back(std::move(b));
      } else if (ln.key == "variants") {
        for (const std::string& t : ln.values) {
          if (!kVariants.count(t)) fail(origin, ln.number, "unknown variant '" + t + "'");
          s.variants.push_back(t);
        }
      } else {
        fail(origin, ln.number, "unknown key '" + ln.key + "'");
      }
    } else if (ln.section == "controller") {
      if (ln.key == "gamma") s.params.gamma = one_double(ln, origin);
      else if (ln.key == "epsilon") s.params.blend_width = one_double(ln, origin);
      else if (ln.key == "active_range_factor") s.params.active_range_factor = one_double(ln, origin);
      else if (ln.key == "vd_distance_factor") s.params.vd_distance_factor = one_double(ln, origin);
      else if (ln.key == "aperture_factor") s.params.aperture_factor = one_double(ln, origin);
      else if (ln.key == "guarded_mode_map") s.guarded_mode_map = one_bool(ln, origin);
      else if (ln.key == "closest_vd_map") s.closest_vd_map = one_bool(ln, origin);
      else fail(origin, ln.number, "unknown controller key '" + ln.key + "'");
    } else if (ln.section == "run") {
      if (ln.key == "dt") s.dt = one_double(ln, origin);
      else if (ln.key == "t_max") s.t_max = one_double(ln, origin);
      else if (ln.key == "e_c") s.params.convergence_radius = one_double(ln, origin);
      else if (ln.key == "jump_budget") s.jump_budget = one_int(ln, origin);
      else fail(origin, ln.number, "unknown run key '" + ln.key + "'");
    } else if (ln.section == "sensor") {
      if (ln.key == "range") s.sensor_cfg.range = one_double(ln, origin);
      else if (ln.key == "resolution_deg") s.sensor_cfg.azimuth_step_deg = one_double(ln, origin);
      else if (ln.key == "polar_resolution_deg") s.sensor_cfg.polar_step_deg = one_double(ln, origin);
      else if (ln.key == "margin") s.sensor_cfg.margin = one_double(ln, origin);
      else if (ln.key == "gap_factor") s.sensor_cfg.gap_factor = one_double(ln, origin);
      else if (ln.key == "symmetry_tol") s.sensor_cfg.symmetry_tol = one_double(ln, origin);
      else fail(origin, ln.number, "unknown sensor key '" + ln.key + "'");
    } else if (ln.section == "drive") {
      if (ln.key == "v_max") s.drive_cfg.v_max = one_double(ln, origin);
      else if (ln.key == "omega_max") s.drive_cfg.omega_max = one_double(ln, origin);
      else if (ln.key == "k_v") s.drive_cfg.k_v = one_double(ln, origin);
      else if (ln.key == "p") s.drive_cfg.p = one_double(ln, origin);
      else if (ln.key == "heading0_deg") s.drive_cfg.heading0 = M_PI * one_double(ln, origin) / 180.0;
      else fail(origin, ln.number, "unknown drive key '" + ln.key + "'");
    } else {
      fail(origin, ln.number, "unknown section '" + ln.section + "'");
    }
  }

  if (!has_target) throw ParameterError(origin + ": scenario needs a 'target'");
  if (s.starts.empty() && s.random_starts == 0) {
    throw ParameterError(origin + ": scenario needs a 'start' or 'random_starts'");
  }
  if (s.variants.empty()) s.variants.push_back("known");
  if (!(s.dt > 0.0)) throw ParameterError(origin + ": run.dt must be positive");
  if (!(s.t_max > 0.0)) throw ParameterError(origin + ": run.t_max must be positive");

  const int min_budget = 2 * static_cast<int>(s.obstacles.size()) + 2;
  if (s.jump_budget == 0) {
    s.jump_budget = std::max(min_budget, 8);
  } else if (s.jump_budget < min_budget) {
    throw ParameterError(origin + ": run.jump_budget must be at least " +
                         std::to_string(min_budget) + " (2b + 2)");
  }

  for (const std::string& key : kDefaultable) {
    if (!seen.count(key)) s.defaulted.push_back(key);
  }

  // Scenario-level validation beyond workspace construction.
  std::vector<std::string> violations;
  const bool sensed = std::any_of(s.variants.begin(), s.variants.end(), [](const std::string& v) {
    return v == "sensor" || v == "sensor-unicycle";
  });
  const bool driven = std::any_of(s.variants.begin(), s.variants.end(), [](const std::string& v) {
    return v == "unicycle" || v == "sensor-unicycle";
  });
  if (sensed && s.dimension != 2 && s.dimension != 3) {
    violations.push_back("sensor variants need dimension 2 or 3");
  }
  if (driven && s.dimension != 2) {
    violations.push_back("unicycle variants need dimension 2");
  }
  if (sensed) {
    // Dilated reconstructions stay disjoint only when true surfaces are
    // more than two margins apart.
    for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
      for (std::size_t j = i + 1; j < s.obstacles.size(); ++j) {
        const double gap = (s.obstacles[i].center - s.obstacles[j].center).norm() -
                           s.obstacles[i].radius - s.obstacles[j].radius;
        if (gap <= 2.0 * s.sensor_cfg.margin) {
          violations.push_back("obstacles " + std::to_string(i) + " and " + std::to_string(j) +
                               " are closer than twice the sensor margin");
        }
      }
    }
  }
  WorkspaceParams wp = s.params;
  if (sensed) wp.sensor_range = s.sensor_cfg.range;
  std::vector<std::string> world = Workspace::check(s.dimension, s.obstacles, s.target, wp);
  violations.insert(violations.end(), world.begin(), world.end());
  {
    // Explicit starts must begin in free space.
    for (std::size_t i = 0; i < s.starts.size(); ++i) {
      for (const Ball& b : s.obstacles) {
        if ((s.starts[i] - b.center).norm() <= b.radius) {
          violations.push_back("start " + std::to_string(i) + " lies inside an obstacle");
          break;
        }
      }
    }
  }
  if (!violations.empty()) throw ValidationError(violations);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError(path + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

Workspace make_workspace(const Scenario& s) {
  WorkspaceParams wp = s.params;
  const bool sensed = std::any_of(s.variants.begin(), s.variants.end(), [](const std::string& v) {
    return v == "sensor" || v == "sensor-unicycle";
  });
  if (sensed) wp.sensor_range = s.sensor_cfg.range;
  return Workspace::create(s.dimension, s.obstacles, s.target, wp);
}

std::vector<Vec> scenario_starts(const Scenario& s, const Workspace& ws) {
  std::vector<Vec> starts = s.starts;
  SplitMix64 rng(s.seed);
  for (int i = 0; i < s.random_starts; ++i) {
    starts.push_back(sample_free_point(ws, rng));
  }
  return starts;
}

RunConfig variant_config(const Scenario& s, const std::string& variant) {
  if (!kVariants.count(variant)) throw ParameterError("unknown variant '" + variant + "'");
  RunConfig cfg;
  cfg.dt = s.dt;
  cfg.t_max = s.t_max;
  cfg.jump_budget = s.jump_budget;
  cfg.guarded_mode_map = s.guarded_mode_map;
  cfg.closest_vd_map = s.closest_vd_map;
  if (variant == "sensor" || variant == "sensor-unicycle") cfg.sensor = s.sensor_cfg;
  if (variant == "unicycle" || variant == "sensor-unicycle") cfg.drive = s.drive_cfg;
  return cfg;
}

}  // namespace hybridnav
