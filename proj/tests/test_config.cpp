#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "mmflow/config.hpp"
#include "mmflow/io.hpp"
#include "mmflow/jko.hpp"

using namespace mmflow;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_CASE("defaults", "[config]") {
  const Config c = parse_config_text("");
  CHECK(c.x_min == -6.0);
  CHECK(c.x_max == 6.0);
  CHECK(c.n_cells == 800);
  CHECK(c.M == 400);
  CHECK(c.m == 1.0);
  CHECK(c.family == "zero");
  CHECK(c.T == 0.5);
  CHECK(c.tau == 1e-3);
  CHECK(c.inner_tol == 1e-8 / 400.0);
  CHECK(c.inner_max_iter == 5000);
}

TEST_CASE("parsing", "[config]") {
  const Config c = parse_config_text(
      "# comment\n"
      "potential.family = gaussian_attraction\n"
      "  potential.a1 =  0.8  \n"
      "\n"
      "energy.omega = 16\n"
      "transport.M = 200\n");
  CHECK(c.family == "gaussian_attraction");
  CHECK(c.a1 == 0.8);
  CHECK(c.omega == 16.0);
  CHECK(c.inner_tol == 1e-8 / 200.0);
}

TEST_CASE("errors name the offending key", "[config]") {
  CHECK_THAT(config_error("energy.m = 0.5\n"), ContainsSubstring("energy.m") && ContainsSubstring("m must be >= 1"));
  CHECK_THAT(config_error("time.T = 1\ntime.T = 2\n"),
             ContainsSubstring("duplicate key time.T") && ContainsSubstring("line 2") &&
                 ContainsSubstring("line 1"));
  CHECK_THAT(config_error("time.dt = 1\n"), ContainsSubstring("unknown key time.dt"));
  CHECK_THAT(config_error("transport.M = 12x\n"), ContainsSubstring("transport.M"));
  CHECK_THAT(config_error("time.tau = 0.5\n"), ContainsSubstring("time.tau"));
  CHECK_THAT(config_error("potential.family = modulated_quadratic\npotential.a1 = 2\n"),
             ContainsSubstring("a0 > |a1|"));
  CHECK_THAT(config_error("no equals sign\n"), ContainsSubstring("line 1"));
  CHECK_THROWS_AS(parse_config("/nonexistent/config.txt"), Error);
}

TEST_CASE("emit and parse round trip", "[config]") {
  Config c;
  c.family = "confinement";
  c.v = "double_well";
  c.a0 = 1.25;
  c.a1 = -0.1;
  c.tau = 2.5e-3;
  c.omega = 1.0 / 3.0;
  c.initial_mean = 0.1;
  c = validated(c);
  const Config back = parse_config_text(emit_config(c));
  CHECK(back == c);
  CHECK(emit_config(back) == emit_config(c));
}

TEST_CASE("format_double is shortest round-trip", "[config]") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-3) == "0.001");
  CHECK(format_double(2.0) == "2");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
}

TEST_CASE("factories", "[config]") {
  Config c = parse_config_text("potential.family = gaussian_attraction\npotential.s = 0.5\nenergy.omega = 4\n");
  const auto spec = make_spec(c);
  CHECK(spec.omega == 4.0);
  CHECK(spec.potential.eval(0.0, 0.0, 0.5) == gaussian_attraction(1.0, 0.0, 0.5).eval(0.0, 0.0, 0.5));
  CHECK(make_grid(c).n_cells() == 800);
  CHECK(make_initial(c).mass() == Catch::Approx(1.0).margin(1e-12));
  const auto j = make_jko_config(c);
  CHECK(j.M == 400);
  CHECK(j.tau(1) == 1e-3);

  c = parse_config_text("energy.m = 2\ninitial.profile = barenblatt\ninitial.time = 0.1\n");
  const auto b = make_initial(c);
  CHECK(l1_distance(b, barenblatt_density(make_grid(c), 2.0, 0.1)) <= 1e-3);
  CHECK_THAT(config_error("initial.profile = barenblatt\n"), ContainsSubstring("m > 1"));
}

TEST_CASE("run directory round trip", "[config]") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mmflow_test_config_roundtrip";
  fs::remove_all(dir);
  const Config c = parse_config_text("transport.M = 50\ngrid.n_cells = 100\ntime.T = 0.02\ntime.tau = 0.01\n");
  const auto spec = make_spec(c);
  const auto traj = run_jko(make_initial(c), spec, make_jko_config(c));
  write_run_directory(dir, traj, spec, c);
  CHECK(parse_config((dir / "effective_config.txt").string()) == c);
  const auto back = read_run_directory(dir, spec, make_grid(c));
  REQUIRE(back.size() == traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(back.records[k].t == traj.records[k].t);
    CHECK(back.snapshots[k].particles.vector() == traj.snapshots[k].particles.vector());
  }
  fs::remove_all(dir);
}
