#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mmflow/highfreq.hpp"

using namespace mmflow;
using Catch::Matchers::WithinAbs;

namespace {

const Grid kGrid(-6.0, 6.0, 400);
const std::vector<double> kOmegas{1.0, 2.0, 4.0, 8.0, 16.0};

JkoConfig small_config() {
  JkoConfig c;
  c.M = 100;
  c.tau = TauSchedule::uniform(5e-3);
  c.T = 0.25;
  return c;
}

}  // namespace

TEST_CASE("fit_rate", "[highfreq]") {
  const std::vector<double> w{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  SECTION("exact power laws") {
    std::vector<double> e;
    for (double x : w) e.push_back(0.7 / std::sqrt(x));
    const auto f = fit_rate(w, e);
    CHECK_THAT(f.slope, WithinAbs(-0.5, 1e-10));
    CHECK_THAT(f.constant, WithinAbs(0.7, 1e-10));
    e.clear();
    for (double x : w) e.push_back(3.0 / x);
    const auto g = fit_rate(w, e);
    CHECK_THAT(g.slope, WithinAbs(-1.0, 1e-10));
    CHECK_THAT(g.constant, WithinAbs(3.0, 1e-10));
  }
  SECTION("one percent noise") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> e;
    for (double x : w) e.push_back(2.0 / x * (1.0 + noise(rng)));
    CHECK_THAT(fit_rate(w, e).slope, WithinAbs(-1.0, 0.05));
  }
  SECTION("scaling the errors moves only the constant") {
    std::vector<double> e{0.9, 0.5, 0.3, 0.12, 0.07, 0.03};
    const auto a = fit_rate(w, e);
    for (double& x : e) x *= 10.0;
    const auto b = fit_rate(w, e);
    CHECK_THAT(b.slope, WithinAbs(a.slope, 1e-12));
    CHECK_THAT(b.constant, WithinAbs(10.0 * a.constant, 1e-10));
  }
  SECTION("points at the noise floor are dropped") {
    const std::vector<double> e{1.0, 0.5, 0.0, 1e-16, 0.0, 0.0};
    try {
      fit_rate(w, e);
      FAIL("expected insufficient points");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::insufficient_points);
    }
    CHECK_THROWS_AS(fit_rate({1.0, 2.0}, {1.0}), Error);
  }
}

TEST_CASE("time-independent potential gives zero sweep error", "[highfreq]") {
  const auto w = gaussian_attraction(1.0, 0.0, 1.0);
  const auto res = sweep_omega(gaussian_density(kGrid, 0.0, 0.25), w, 1.0, kOmegas, small_config(), 1);
  for (double e : res.errors) CHECK(e <= 1e-10);
  CHECK(std::isnan(res.fitted_slope));
  CHECK_FALSE(res.notes.empty());
}

TEST_CASE("JKO sweep errors decay with frequency", "[highfreq]") {
  const auto w = modulated_quadratic(1.0, 0.8);
  const auto rho0 = gaussian_density(kGrid, 0.0, 0.25);
  const auto sweep = sweep_omega_runs(rho0, w, 1.0, kOmegas, small_config(), 1);
  for (const auto& f : sweep.failures) CHECK(f.empty());
  for (std::size_t i = 0; i + 1 < kOmegas.size(); ++i) CHECK(sweep.result.errors[i + 1] < sweep.result.errors[i]);
  CHECK(sweep.result.fitted_slope < -0.5);

  SECTION("stored errors are recomputable from the trajectories") {
    // Independent averaged reference, run outside the sweep.
    const auto ref = run_jko(rho0, EnergySpec(1.0, average_potential(w), 1.0), small_config());
    for (std::size_t i = 0; i < kOmegas.size(); ++i) {
      double e = 0.0;
      for (std::size_t k = 0; k < ref.size(); ++k)
        e = std::max(e, w2_distance(sweep.runs[i].snapshots[k].particles, ref.snapshots[k].particles));
      CHECK(e == sweep.result.errors[i]);
    }
  }
  SECTION("results do not depend on the thread count") {
    const auto again = sweep_omega(rho0, w, 1.0, kOmegas, small_config(), 3);
    CHECK(again.errors == sweep.result.errors);
    CHECK(again.fitted_slope == sweep.result.fitted_slope);
  }
}

TEST_CASE("sweep argument validation", "[highfreq]") {
  const auto rho0 = gaussian_density(kGrid, 0.0, 0.25);
  const auto w = modulated_quadratic(1.0, 0.8);
  CHECK_THROWS_AS(sweep_omega(rho0, w, 1.0, {}, small_config(), 1), Error);
  CHECK_THROWS_AS(sweep_omega(rho0, w, 1.0, {2.0, 1.0}, small_config(), 1), Error);
  CHECK_THROWS_AS(sweep_omega(rho0, w, 1.0, {0.0, 1.0}, small_config(), 1), Error);
}

TEST_CASE("failed runs are reported per frequency", "[highfreq]") {
  auto cfg = small_config();
  cfg.inner_max_iter = 1;
  cfg.method = InnerMethod::gradient;
  const auto rho0 = gaussian_density(kGrid, 0.0, 0.25);
  const auto w = modulated_quadratic(1.0, 0.8);
  CHECK_THROWS_AS(sweep_omega(rho0, w, 1.0, kOmegas, cfg, 1), Error);
}

TEST_CASE("Euclidean sweep", "[highfreq]") {
  const std::vector<double> omegas{1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  const double tau = 1e-3, T = 1.0;
  SECTION("no forcing, no error") {
    const auto s = sweep_omega_euclidean({1.0}, 0.0, {1.0}, omegas, tau, T);
    for (double e : s.scheme.errors) CHECK(e == 0.0);
    for (double e : s.analytic.errors) CHECK(e == 0.0);
  }
  SECTION("first-order decay in omega") {
    const auto s = sweep_omega_euclidean({1.0}, 0.5, {1.0}, omegas, tau, T);
    CHECK(s.analytic.fitted_slope <= -0.9);
    CHECK(s.scheme.fitted_slope <= -0.9);
    // Each scheme is within O(tau) of its ODE, so the two errors agree to O(tau).
    for (std::size_t i = 0; i < omegas.size(); ++i)
      CHECK(std::abs(s.scheme.errors[i] - s.analytic.errors[i]) <= 5.0 * tau * T);
  }
}
