#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mmflow/potentials.hpp"
#include "mmflow/validation.hpp"

using namespace mmflow;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<TimePotential> families() {
  return {modulated_quadratic(1.0, 0.8), gaussian_attraction(1.0, 0.5, 0.7),
          separable_confinement(1.0, 0.3, Confinement::quadratic()),
          separable_confinement(0.5, 0.2, Confinement::double_well()), constant_potential(2.0)};
}

// a(t) (x - y)^2 / 2 with a(t) = 1 + sin(2 pi t), built without the a0 > |a1|
// guard of the family constructor.
TimePotential one_plus_sine_quadratic() {
  return TimePotential({{TimeProfile::sinusoidal(1.0, 1.0), QuadraticKernel{}}});
}

}  // namespace

TEST_CASE("family constructors validate parameters", "[potentials]") {
  CHECK_THROWS_AS(modulated_quadratic(1.0, 1.0), Error);
  CHECK_THROWS_AS(gaussian_attraction(1.0, 0.5, 0.0), Error);
  CHECK_NOTHROW(modulated_quadratic(1.0, -0.5));
}

TEST_CASE("closed-form derivatives match central differences", "[potentials]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-4.0, 4.0), ut(0.0, 1.0);
  for (const auto& w : families()) {
    for (int i = 0; i < 1000; ++i) {
      const double t = ut(rng), x = ux(rng), y = ux(rng);
      const double h = 1e-5;
      const double g = w.grad_x(t, x, y);
      const double fd = (w.eval(t, x + h, y) - w.eval(t, x - h, y)) / (2 * h);
      REQUIRE(std::abs(g - fd) <= 1e-6 * (1.0 + std::abs(g)));
      const double l = w.lap_x(t, x, y);
      const double fd2 = (w.grad_x(t, x + h, y) - w.grad_x(t, x - h, y)) / (2 * h);
      REQUIRE(std::abs(l - fd2) <= 1e-6 * (1.0 + std::abs(l)));
      const double d = w.dt(t, x, y);
      const double fdt = (w.eval(t + h, x, y) - w.eval(t - h, x, y)) / (2 * h);
      REQUIRE(std::abs(d - fdt) <= 1e-6 * (1.0 + std::abs(d)));
    }
  }
}

TEST_CASE("symmetry and periodicity", "[potentials]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-6.0, 6.0), ut(0.0, 1.0);
  for (const auto& w : families()) {
    for (int i = 0; i < 500; ++i) {
      const double t = ut(rng), x = ux(rng), y = ux(rng);
      const double v = w.eval(t, x, y);
      CHECK(w.eval(t, y, x) == v);
      CHECK_THAT(w.eval(t + 1.0, x, y), WithinAbs(v, 1e-12 * (1.0 + std::abs(v))));
    }
  }
}

TEST_CASE("rescale_frequency", "[potentials]") {
  const auto w = one_plus_sine_quadratic();
  SECTION("omega = 1 is the identity") {
    const auto r = rescale_frequency(w, 1.0);
    for (double t : {0.0, 0.13, 0.5, 0.77})
      CHECK(r.eval(t, 0.3, -1.1) == w.eval(t, 0.3, -1.1));
  }
  SECTION("omega = 2 at t = 1/4 samples a(1/2) = 1") {
    const auto r = rescale_frequency(w, 2.0);
    // W = a (x - y)^2 / 2 with (x - y)^2 / 2 = 2 at x - y = 2.
    CHECK_THAT(r.eval(0.25, 1.0, -1.0), WithinAbs(2.0, 1e-14));
    CHECK(r.period() == 0.5);
  }
  SECTION("period 1/omega after rescaling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(0.0, 1.0);
    for (double omega : {3.0, 8.0, 64.0}) {
      const auto r = rescale_frequency(gaussian_attraction(1.0, 0.8, 1.0), omega);
      for (int i = 0; i < 100; ++i) {
        const double t = ut(rng), x = ux(rng), y = ux(rng);
        CHECK_THAT(r.eval(t + 1.0 / omega, x, y), WithinAbs(r.eval(t, x, y), 1e-12));
      }
    }
  }
  CHECK_THROWS_AS(rescale_frequency(w, 0.0), Error);
}

TEST_CASE("average_potential", "[potentials]") {
  const QuadraticKernel k;
  SECTION("(1 + sin) w averages to w") {
    for (std::size_t n : {8u, 16u, 32u}) {
      const auto avg = average_potential(one_plus_sine_quadratic(), n);
      for (double x : {-2.0, 0.5, 3.0})
        CHECK_THAT(avg.eval(0.0, x, 1.0), WithinAbs(kernel::eval(k, x, 1.0), 1e-12));
    }
  }
  SECTION("time-independent potential is unchanged") {
    const auto w = separable_confinement(1.5, 0.0, Confinement::double_well());
    const auto avg = average_potential(w);
    for (double x : {-2.0, 0.5, 3.0}) CHECK(avg.eval(0.0, x, 0.7) == w.eval(0.3, x, 0.7));
  }
  SECTION("(1 + cos^2) w averages to 1.5 w") {
    const TimeProfile p([](double t) { return 1.0 + std::pow(std::cos(kTwoPi * t), 2); },
                        [](double t) { return -kTwoPi * std::sin(2.0 * kTwoPi * t); });
    const auto avg = average_potential(TimePotential({{p, k}}));
    for (double x : {-2.0, 0.5, 3.0})
      CHECK_THAT(avg.eval(0.0, x, -0.4), WithinAbs(1.5 * kernel::eval(k, x, -0.4), 1e-12));
  }
  SECTION("averaging is linear") {
    const auto w1 = gaussian_attraction(1.0, 0.8, 1.0);
    const auto w2 = modulated_quadratic(2.0, 1.5);
    const auto lhs = average_potential(0.7 * w1 + (-1.3) * w2);
    const auto a1 = average_potential(w1), a2 = average_potential(w2);
    for (double x : {-2.0, 0.5, 3.0}) {
      const double expect = 0.7 * a1.eval(0.0, x, 0.2) - 1.3 * a2.eval(0.0, x, 0.2);
      CHECK_THAT(lhs.eval(0.0, x, 0.2), WithinAbs(expect, 1e-12));
      const double gexp = 0.7 * a1.grad_x(0.0, x, 0.2) - 1.3 * a2.grad_x(0.0, x, 0.2);
      CHECK_THAT(lhs.grad_x(0.0, x, 0.2), WithinAbs(gexp, 1e-12));
    }
  }
  SECTION("averaging a rescaled potential over its period gives the same average") {
    const auto w = gaussian_attraction(1.0, 0.8, 1.0);
    const auto direct = average_potential(w);
    const auto rescaled = average_potential(rescale_frequency(w, 16.0));
    for (double x : {-2.0, 0.5, 3.0})
      CHECK_THAT(rescaled.eval(0.0, x, 0.1), WithinAbs(direct.eval(0.0, x, 0.1), 1e-12));
  }
}

TEST_CASE("validate_assumptions", "[potentials]") {
  const Grid domain(-6.0, 6.0, 100);
  SECTION("Gaussian attraction passes with L below the analytic bound") {
    const double a0 = 1.0, a1 = 0.8, s = 0.7;
    const auto rep = validate_assumptions(gaussian_attraction(a0, a1, s), domain, 1.0, 2000, 42);
    CHECK(rep.all_pass());
    // sup |d_x (W_t - W_bar)| = |a1| s^{-1} e^{-1/2}.
    CHECK(rep.L <= (a0 + std::abs(a1)) / s * std::exp(-0.5) * 2.0);
    CHECK(rep.L > 0.5 * std::abs(a1) / s * std::exp(-0.5));
    CHECK(rep.r < 2.0);
    for (double c : {rep.d1, rep.d2, rep.d3, rep.d4, rep.L, rep.alpha_mass}) CHECK(c >= 0.0);
  }
  SECTION("modulated quadratic: finite on-domain L with off-domain note") {
    const auto rep = validate_assumptions(modulated_quadratic(2.0, 1.0), domain, 1.0, 2000, 42);
    const auto w6 = std::find_if(rep.checks.begin(), rep.checks.end(),
                                 [](const auto& c) { return c.name == "W6_L"; });
    REQUIRE(w6 != rep.checks.end());
    CHECK(w6->outcome == CheckOutcome::pass);
    CHECK(rep.L <= 12.0 * (1.0 + 1e-12));  // |a1| max|x - y| on [-6, 6]
    CHECK(std::find(rep.notes.begin(), rep.notes.end(), "global (W6) fails off-domain") !=
          rep.notes.end());
  }
  SECTION("time-independent potential has no time variation") {
    const auto rep = validate_assumptions(gaussian_attraction(1.0, 0.0, 1.0), domain, 1.0, 500, 1);
    CHECK(rep.alpha_mass == 0.0);
    CHECK(rep.d2 == 0.0);
    CHECK(rep.L <= 1e-12);
  }
  SECTION("double-well confinement violates quadratic growth") {
    const auto rep =
        validate_assumptions(separable_confinement(1.0, 0.0, Confinement::double_well()), domain, 1.0, 2000, 3);
    const auto w2 = std::find_if(rep.checks.begin(), rep.checks.end(),
                                 [](const auto& c) { return c.name == "W2_growth_exponent"; });
    CHECK(w2->outcome == CheckOutcome::fail);
  }
  SECTION("seeded sampling is reproducible") {
    const auto a = validate_assumptions(gaussian_attraction(1.0, 0.8, 1.0), domain, 1.0, 300, 9);
    const auto b = validate_assumptions(gaussian_attraction(1.0, 0.8, 1.0), domain, 1.0, 300, 9);
    CHECK(a.L == b.L);
    CHECK(a.d3 == b.d3);
  }
  CHECK_THROWS_AS(validate_assumptions(zero_potential(), domain, 1.0, 10), Error);
}
