#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "hybridnav/errors.hpp"
#include "hybridnav/metrics.hpp"
#include "hybridnav/scenario.hpp"

using namespace hybridnav;

namespace {

const char* kFull = R"(# demo world
name demo
dimension 2
seed 42
target 4 0
start -2 0
start -2 1
random_starts 2
obstacle 1 0 0.8
variants known sensor

[controller]
gamma = 2.0
epsilon = 0.05
guarded_mode_map = true

[run]
dt = 0.002
t_max = 30
e_c = 0.02
jump_budget = 8

[sensor]
range = 2.5
resolution_deg = 1.0
margin = 0.03

[drive]
v_max = 0.25
heading0_deg = 45
)";

}  // namespace

TEST_CASE("full scenario round-trips every section") {
  const Scenario s = parse_scenario(kFull);
  CHECK(s.name == "demo");
  CHECK(s.dimension == 2);
  CHECK(s.seed == 42);
  CHECK(s.target[0] == doctest::Approx(4.0));
  REQUIRE(s.starts.size() == 2);
  CHECK(s.random_starts == 2);
  REQUIRE(s.obstacles.size() == 1);
  CHECK(s.obstacles[0].radius == doctest::Approx(0.8));
  CHECK(s.params.gamma == doctest::Approx(2.0));
  CHECK(s.params.blend_width == doctest::Approx(0.05));
  CHECK(s.params.convergence_radius == doctest::Approx(0.02));
  CHECK(s.dt == doctest::Approx(0.002));
  CHECK(s.t_max == doctest::Approx(30.0));
  CHECK(s.jump_budget == 8);
  CHECK(s.sensor_cfg.range == doctest::Approx(2.5));
  CHECK(s.sensor_cfg.azimuth_step_deg == doctest::Approx(1.0));
  CHECK(s.sensor_cfg.margin == doctest::Approx(0.03));
  CHECK(s.drive_cfg.v_max == doctest::Approx(0.25));
  CHECK(s.drive_cfg.heading0 == doctest::Approx(M_PI / 4));
  REQUIRE(s.variants.size() == 2);
  CHECK(s.variants[0] == "known");
  CHECK(s.variants[1] == "sensor");
  // Untouched keys are echoed as defaulted.
  CHECK(std::find(s.defaulted.begin(), s.defaulted.end(),
                  "controller.vd_distance_factor") != s.defaulted.end());
  CHECK(std::find(s.defaulted.begin(), s.defaulted.end(), "run.dt") ==
        s.defaulted.end());
}

TEST_CASE("workspace and starts derive from the scenario") {
  const Scenario s = parse_scenario(kFull);
  const Workspace ws = make_workspace(s);
  CHECK(ws.dimension() == 2);
  CHECK(ws.size() == 1);
  CHECK(ws.gamma() == doctest::Approx(2.0));
  const auto starts = scenario_starts(s, ws);
  CHECK(starts.size() == 4);  // two explicit plus two random
  for (const auto& x0 : starts) CHECK(ws.clearance(x0) > 0.0);
  // Random starts are deterministic in the seed.
  const auto again = scenario_starts(s, ws);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    CHECK((starts[i] - again[i]).norm() == 0.0);
  }
}

TEST_CASE("variant configurations carry only their own equipment") {
  const Scenario s = parse_scenario(kFull);
  const RunConfig known = variant_config(s, "known");
  CHECK_FALSE(known.sensor.has_value());
  CHECK_FALSE(known.drive.has_value());
  CHECK(known.jump_budget == 8);
  CHECK(known.dt == doctest::Approx(0.002));
  const RunConfig sensed = variant_config(s, "sensor");
  REQUIRE(sensed.sensor.has_value());
  CHECK(sensed.sensor->range == doctest::Approx(2.5));
  CHECK_THROWS_AS(variant_config(s, "flying"), ParameterError);
}

TEST_CASE("parse errors carry file and line context") {
  CHECK_THROWS_WITH_AS(parse_scenario("dimension 2\nbogus_key 1\n", "w.ini"),
                       doctest::Contains("w.ini:2"), ParameterError);
  // Geometry tokens before the dimension is known are rejected.
  CHECK_THROWS_AS(parse_scenario("target 4 0\ndimension 2\n"), ParameterError);
  // Wrong obstacle arity for the dimension.
  CHECK_THROWS_AS(parse_scenario("dimension 3\ntarget 4 0 0\nobstacle 1 0 0.8\n"),
                  ParameterError);
  // Unknown variant token.
  CHECK_THROWS_AS(
      parse_scenario("dimension 2\ntarget 4 0\nstart 0 4\nobstacle 1 0 0.5\nvariants warp\n"),
      ParameterError);
  // Insufficient jump budget for the obstacle count.
  CHECK_THROWS_AS(parse_scenario("dimension 2\ntarget 4 0\nstart 0 4\n"
                                 "obstacle 1 0 0.5\nvariants known\n[run]\njump_budget = 2\n"),
                  ParameterError);
}

TEST_CASE("equals signs are optional and comments are stripped") {
  const char* text =
      "dimension 2\n"
      "target 4 0  # inline comment\n"
      "start -2 0\n"
      "obstacle 1 0 0.5\n"
      "variants known\n"
      "[run]\n"
      "dt=0.004\n"
      "t_max =  15\n"
      "e_c= 0.05\n";
  const Scenario s = parse_scenario(text);
  CHECK(s.dt == doctest::Approx(0.004));
  CHECK(s.t_max == doctest::Approx(15.0));
  CHECK(s.params.convergence_radius == doctest::Approx(0.05));
}

TEST_CASE("world validation failures surface as scenario errors") {
  // Start inside the obstacle.
  CHECK_THROWS_AS(parse_scenario("dimension 2\ntarget 4 0\nstart 1 0\n"
                                 "obstacle 1 0 0.8\nvariants known\n"),
                  ValidationError);
  // Overlapping obstacles.
  CHECK_THROWS_AS(parse_scenario("dimension 2\ntarget 8 0\nstart -2 0\n"
                                 "obstacle 1 0 0.8\nobstacle 1.5 0 0.8\nvariants known\n"),
                  ValidationError);
  // Unicycle runs are planar.
  CHECK_THROWS_AS(parse_scenario("dimension 3\ntarget 4 0 0\nstart -2 0 0\n"
                                 "obstacle 1 0 0 0.8\nvariants unicycle\n"),
                  ValidationError);
}

TEST_CASE("default jump budget covers the worst-case jump count") {
  const Scenario s = parse_scenario(
      "dimension 2\ntarget 8 0\nstart -2 0\n"
      "obstacle 1 0 0.5\nobstacle 3 1 0.5\nobstacle 5 -1 0.5\nvariants known\n");
  // 2b + 2 with b = 3 gives 8, which is also the floor.
  CHECK(variant_config(s, "known").jump_budget == 8);
}

TEST_CASE("metrics summarize a straight two-sample trajectory") {
  Trajectory traj;
  Sample a;
  a.t = 0.0;
  a.j = 0;
  a.x = Vec::Zero(2);
  a.u = Vec::Zero(2);
  a.clearance = 1.0;
  Sample b = a;
  b.t = 1.0;
  b.x = Vec::Constant(2, 1.0);
  b.clearance = 0.5;
  traj.samples = {a, b};
  RunResult rr{std::move(traj), Outcome{OutcomeKind::Converged, 1.0, 0, ""}};
  Vec target = Vec::Constant(2, 1.0);
  const RunMetrics m = compute_metrics(rr, target);
  CHECK(m.path_length == doctest::Approx(std::sqrt(2.0)));
  CHECK(m.straight_line == doctest::Approx(std::sqrt(2.0)));
  CHECK(m.length_deviation_pct == doctest::Approx(0.0));
  CHECK(m.min_clearance == doctest::Approx(0.5));
  CHECK(m.final_error == doctest::Approx(0.0));
}

TEST_CASE("metrics and trajectory writers are deterministic") {
  const Scenario s = parse_scenario(kFull);
  const Workspace ws = make_workspace(s);
  const RunConfig cfg = variant_config(s, "known");
  const auto starts = scenario_starts(s, ws);
  const RunResult r1 = run(ws, starts[0], cfg);
  const RunResult r2 = run(ws, starts[0], cfg);
  std::ostringstream m1, m2, c1, c2;
  write_metrics(m1, compute_metrics(r1, ws.target()));
  write_metrics(m2, compute_metrics(r2, ws.target()));
  write_trajectory_csv(c1, r1.trajectory, ws.dimension(), false);
  write_trajectory_csv(c2, r2.trajectory, ws.dimension(), false);
  CHECK(m1.str() == m2.str());
  CHECK(c1.str() == c2.str());
  CHECK(m1.str().find("outcome converged") != std::string::npos);
  // Header names every column of the chosen dimension.
  CHECK(c1.str().rfind("t,j,x_1,x_2,k,m,u_1,u_2,clearance", 0) == 0);
}
