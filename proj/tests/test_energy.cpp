#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mmflow/energy.hpp"

using namespace mmflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

QuantileRep equispaced(double a, double b, std::size_t M) {
  std::vector<double> x(M);
  for (std::size_t i = 0; i < M; ++i) x[i] = a + (b - a) * (i + 0.5) / static_cast<double>(M);
  return QuantileRep(std::move(x));
}

QuantileRep random_config(std::mt19937_64& rng, std::size_t M) {
  std::uniform_real_distribution<double> gap(0.05, 0.3);
  std::vector<double> x(M);
  x[0] = -2.0;
  for (std::size_t i = 1; i < M; ++i) x[i] = x[i - 1] + gap(rng);
  return QuantileRep(std::move(x));
}

// The same kernel through the generic callable path.
CustomKernel as_custom(const SpatialKernel& k) {
  return {[k](double x, double y) { return kernel::eval(k, x, y); },
          [k](double x, double y) { return kernel::grad_x(k, x, y); },
          [k](double x, double y) { return kernel::lap_x(k, x, y); }};
}

// Direct double sum (1/(2 M^2)) sum_ij W(x_i, x_j).
double brute_interaction(const std::vector<double>& x, const TimePotential& w, double t) {
  double s = 0.0;
  for (double a : x)
    for (double b : x) s += w.eval(t, a, b);
  return s / (2.0 * x.size() * x.size());
}

}  // namespace

TEST_CASE("internal energy of uniform configurations", "[energy]") {
  const std::size_t M = 1000;
  CHECK(std::abs(internal_energy(equispaced(0.0, 1.0, M), 1.0)) <= 1e-10);
  CHECK_THAT(internal_energy(equispaced(0.0, 1.0, M), 2.0), WithinAbs(1.0, 2.0 / M));
  CHECK_THAT(internal_energy(equispaced(0.0, 2.0, M), 1.0), WithinAbs(std::log(0.5), 2.0 / M));
  const std::vector<double> bad{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(internal_energy(bad, 1.0), Error);
  CHECK_THROWS_AS(internal_energy(equispaced(0.0, 1.0, 4), 0.5), Error);
}

TEST_CASE("porous-medium energy approaches the entropy as m -> 1", "[energy]") {
  // U_{1+e} = (M-1)/(M e) + H + O(e) for a fixed configuration.
  std::mt19937_64 rng(1);
  const auto q = random_config(rng, 60);
  const double M = 60.0;
  const double H = internal_energy(q, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double e : {1e-2, 1e-3, 1e-4}) {
    const double diff = std::abs(internal_energy(q, 1.0 + e) - (M - 1.0) / (M * e) - H);
    CHECK(diff < prev);
    CHECK(diff <= 10.0 * e);
    prev = diff;
  }
}

TEST_CASE("interaction energy examples", "[energy]") {
  const auto q = equispaced(0.0, 1.0, 400);
  CHECK(interaction_energy(q, constant_potential(1.0), 0.0) == 0.5);
  // W = (x - y)^2: half the mean squared difference is the variance 1/12.
  const auto sq = 2.0 * modulated_quadratic(1.0, 0.0);
  CHECK_THAT(interaction_energy(q, sq, 0.0), WithinAbs(1.0 / 12.0, 1e-3));
  // Separable W = V(x) + V(y) integrates V once.
  const auto sep = separable_confinement(1.0, 0.0, Confinement::double_well());
  double single = 0.0;
  for (double x : q.vector()) single += 0.25 * x * x * x * x - 0.5 * x * x;
  single /= 400.0;
  CHECK_THAT(interaction_energy(q, sep, 0.0), WithinAbs(single, 1e-12));
}

TEST_CASE("kernel fast paths agree with the direct double sum", "[energy]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> x(57);
  for (double& v : x) v = u(rng);
  const std::vector<SpatialKernel> kernels{ConstantKernel{0.7}, QuadraticKernel{}, GaussianKernel{0.8},
                                           SeparableKernel{Confinement::double_well()}};
  for (const auto& k : kernels) {
    const TimePotential fast({{TimeProfile::sinusoidal(1.0, 0.4), k}});
    const TimePotential slow({{TimeProfile::sinusoidal(1.0, 0.4), as_custom(k)}});
    const double t = 0.37;
    const double ref = brute_interaction(x, slow, t);
    CHECK_THAT(interaction_energy(x, fast, t), WithinAbs(ref, 1e-12 * (1.0 + std::abs(ref))));
    CHECK_THAT(interaction_energy(x, slow, t), WithinAbs(ref, 1e-12 * (1.0 + std::abs(ref))));
    std::vector<double> gf(x.size(), 0.0), gs(x.size(), 0.0), cf(x.size(), 0.0), cs(x.size(), 0.0);
    interaction_gradient(x, fast, t, gf, cf);
    interaction_gradient(x, slow, t, gs, cs);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK_THAT(gf[i], WithinAbs(gs[i], 1e-12));
      CHECK_THAT(cf[i], WithinAbs(cs[i], 1e-12));
    }
  }
}

TEST_CASE("interaction energy is invariant under relabeling", "[energy]") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> x(80);
  for (double& v : x) v = u(rng);
  const auto w = gaussian_attraction(1.0, 0.5, 0.9);
  const double e = interaction_energy(x, w, 0.2);
  std::shuffle(x.begin(), x.end(), rng);
  CHECK_THAT(interaction_energy(x, w, 0.2), WithinRel(e, 1e-12));
}

TEST_CASE("total energy", "[energy]") {
  const auto q = equispaced(0.0, 1.0, 500);
  CHECK(total_energy(q, EnergySpec(1.0, zero_potential()), 0.3) == internal_energy(q, 1.0));
  CHECK(total_energy(q, EnergySpec(2.0, zero_potential()), 0.3) == internal_energy(q, 2.0));
  CHECK_THAT(total_energy(q, EnergySpec(1.0, constant_potential(1.0)), 0.0), WithinAbs(0.5, 1e-10));
  const auto w = gaussian_attraction(1.0, 0.8, 1.0);
  CHECK(total_energy(q, EnergySpec(1.0, w, 1.0), 0.0) == total_energy(q, EnergySpec(1.0, w, 64.0), 0.0));
  CHECK_THROWS_AS(EnergySpec(0.5, zero_potential()), Error);
  CHECK_THROWS_AS(EnergySpec(1.0, zero_potential(), 0.0), Error);
}

TEST_CASE("energy gradient matches finite differences", "[energy]") {
  std::mt19937_64 rng(5);
  const std::vector<EnergySpec> specs{
      EnergySpec(1.0, gaussian_attraction(1.0, 0.8, 1.0), 3.0),
      EnergySpec(2.0, modulated_quadratic(1.0, 0.5), 1.0),
      EnergySpec(1.5, separable_confinement(1.0, 0.3, Confinement::double_well()), 2.0)};
  for (int trial = 0; trial < 100; ++trial) {
    const auto& spec = specs[trial % specs.size()];
    const auto q = random_config(rng, 30);
    const double t = 0.01 * trial;
    const auto g = energy_gradient(q, spec, t);
    auto x = q.vector();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-6;
      const double x0 = x[i];
      x[i] = x0 + h;
      const double ep = total_energy(std::span<const double>(x), spec, t);
      x[i] = x0 - h;
      const double em = total_energy(std::span<const double>(x), spec, t);
      x[i] = x0;
      const double fd = (ep - em) / (2.0 * h);
      REQUIRE(std::abs(g[i] - fd) <= 1e-6 * (1.0 + std::abs(g[i])));
    }
  }
}

TEST_CASE("internal-energy gradient structure", "[energy]") {
  const auto q = equispaced(-1.0, 1.0, 200);
  const auto g = energy_gradient(q, EnergySpec(1.0, zero_potential()), 0.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(std::abs(g[i]) <= 1e-9);
  // Boundary particles are pushed outward.
  CHECK(g.front() > 0.0);
  CHECK(g.back() < 0.0);

  std::mt19937_64 rng(6);
  const auto r = random_config(rng, 40);
  auto shifted = r.vector();
  for (double& x : shifted) x += 3.7;
  std::vector<double> g1(40, 0.0), g2(40, 0.0);
  internal_gradient(r.positions(), 2.0, g1);
  internal_gradient(shifted, 2.0, g2);
  double sum = 0.0;
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK_THAT(g2[i], WithinAbs(g1[i], 1e-9 * (1.0 + std::abs(g1[i]))));
    sum += g1[i];
  }
  CHECK(std::abs(sum) <= 1e-10);
}

TEST_CASE("h1 seminorm", "[energy]") {
  const Grid g(0.0, 1.0, 200);
  CHECK(h1_seminorm(Density(g, std::vector<double>(200, 3.0)), 1.0) == 0.0);
  std::vector<double> ramp(200);
  for (std::size_t j = 0; j < 200; ++j) ramp[j] = g.center(j);
  CHECK_THAT(h1_seminorm(ramp, g.h(), 2.0), WithinAbs(1.0, 2.0 * g.h()));

  // Standard Gaussian: int (d_x sqrt(rho))^2 = int x^2 rho / 4, by quadrature.
  const int n = 200000;
  const double hq = 12.0 / n;
  double fisher = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -6.0 + (i + 0.5) * hq;
    fisher += hq * 0.25 * x * x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  }
  CHECK_THAT(h1_seminorm(gaussian_density(Grid(-6.0, 6.0, 800), 0.0, 1.0), 1.0), WithinAbs(fisher, 1e-2));
}
