#ifndef MMFLOW_VALIDATION_HPP
#define MMFLOW_VALIDATION_HPP

// Sampled estimates of the regularity constants of a time-periodic potential
// on a compact domain. Everything here is advisory: sampled suprema bound the
// true constants from below.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "mmflow/density.hpp"
#include "mmflow/error.hpp"
#include "mmflow/potentials.hpp"

namespace mmflow {

enum class CheckOutcome { pass, fail, not_checked };

struct AssumptionCheck {
  std::string name;
  double estimate = 0.0;
  double ceiling = std::numeric_limits<double>::infinity();
  CheckOutcome outcome = CheckOutcome::pass;
};

struct ValidationReport {
  double d1 = 0.0;  ///< sup |W| / (1 + x^2 + y^2)
  double d2 = 0.0;  ///< sup |dW/dt| / (1 + x^2 + y^2)
  double d3 = 0.0;  ///< sup |grad_x W| / (1 + |y|^r)
  double d4 = 0.0;  ///< sup |lap_x W| / (1 + x^2 + y^2)
  double r = 0.0;   ///< fitted growth exponent of |grad_x W| in |y|
  double L = 0.0;   ///< Lipschitz constant of W_t - W_bar
  double alpha_mass = 0.0;  ///< int_0^T alpha(t) dt
  double growth_exponent_value = 0.0;
  double growth_exponent_laplacian = 0.0;
  double symmetry_residual = 0.0;
  double periodicity_residual = 0.0;
  std::vector<AssumptionCheck> checks;
  std::vector<std::string> notes;

  bool all_pass() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const auto& c) { return c.outcome == CheckOutcome::fail; });
  }
};

namespace detail {

/// Least-squares slope of ys against xs.
inline double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

/// Exponent p in max_{shell} f ~ (1 + R)^p fitted over the outer half of the
/// radial shells; 0 if f vanishes there.
inline double shell_growth_exponent(const std::vector<double>& radius,
                                    const std::vector<double>& value, double r_max,
                                    std::size_t n_shells) {
  std::vector<double> peak(n_shells, 0.0);
  for (std::size_t i = 0; i < radius.size(); ++i) {
    auto s = static_cast<std::size_t>(radius[i] / r_max * static_cast<double>(n_shells));
    s = std::min(s, n_shells - 1);
    peak[s] = std::max(peak[s], value[i]);
  }
  std::vector<double> xs, ys;
  for (std::size_t s = n_shells / 2; s < n_shells; ++s) {
    if (peak[s] <= 1e-300) continue;
    const double mid = (static_cast<double>(s) + 0.5) / static_cast<double>(n_shells) * r_max;
    xs.push_back(std::log1p(mid));
    ys.push_back(std::log(peak[s]));
  }
  return xs.size() >= 2 ? std::max(0.0, ls_slope(xs, ys)) : 0.0;
}

/// Whether the oscillating part of a term has unbounded gradient on R^2.
inline bool unbounded_oscillation(const PotentialTerm& term) {
  if (term.profile.is_constant()) return false;
  if (std::holds_alternative<QuadraticKernel>(term.kernel)) return true;
  if (const auto* sep = std::get_if<SeparableKernel>(&term.kernel)) return sep->v.name != "constant";
  return std::holds_alternative<CustomKernel>(term.kernel);
}

}  // namespace detail

/// Monte Carlo plus grid sampling over [0, T] x domain^2.
inline ValidationReport validate_assumptions(const TimePotential& w, const Grid& domain, double T,
                                             std::size_t n_samples, std::uint64_t seed = 0) {
  require(n_samples >= 100, "validate_assumptions: n_samples must be >= 100");
  require(T > 0.0, "validate_assumptions: T must be positive");
  ValidationReport rep;
  const TimePotential w_bar = average_potential(w);
  const double lo = domain.x_min();
  const double hi = domain.x_max();
  const double period = w.period();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo, hi);
  std::uniform_real_distribution<double> ut(0.0, T);

  struct Sample {
    double t, x, y;
  };
  std::vector<Sample> samples;
  samples.reserve(n_samples + 21 * 21 * 5);
  for (std::size_t i = 0; i < n_samples; ++i) samples.push_back({ut(rng), ux(rng), ux(rng)});
  for (int it = 0; it < 5; ++it) {
    const double t = T * it / 4.0;
    for (int ix = 0; ix <= 20; ++ix)
      for (int iy = 0; iy <= 20; ++iy)
        samples.push_back({t, lo + (hi - lo) * ix / 20.0, lo + (hi - lo) * iy / 20.0});
  }

  const double r_max = std::hypot(std::max(std::abs(lo), std::abs(hi)),
                                  std::max(std::abs(lo), std::abs(hi)));
  std::vector<double> radius, abs_value, abs_lap;
  radius.reserve(samples.size());
  abs_value.reserve(samples.size());
  abs_lap.reserve(samples.size());
  for (const auto& s : samples) {
    const double weight = 1.0 + s.x * s.x + s.y * s.y;
    const double v = w.eval(s.t, s.x, s.y);
    const double lap = w.lap_x(s.t, s.x, s.y);
    rep.d1 = std::max(rep.d1, std::abs(v) / weight);
    rep.d2 = std::max(rep.d2, std::abs(w.dt(s.t, s.x, s.y)) / weight);
    rep.d4 = std::max(rep.d4, std::abs(lap) / weight);
    radius.push_back(std::hypot(s.x, s.y));
    abs_value.push_back(std::abs(v));
    abs_lap.push_back(std::abs(lap));

    const double scale = 1.0 + std::abs(v);
    rep.symmetry_residual =
        std::max(rep.symmetry_residual, std::abs(v - w.eval(s.t, s.y, s.x)) / scale);
    rep.periodicity_residual =
        std::max(rep.periodicity_residual, std::abs(v - w.eval(s.t + period, s.x, s.y)) / scale);
  }
  rep.growth_exponent_value = detail::shell_growth_exponent(radius, abs_value, r_max, 12);
  rep.growth_exponent_laplacian = detail::shell_growth_exponent(radius, abs_lap, r_max, 12);

  // Gradient growth in |y|, uniform over x in the domain and t in [0, T].
  constexpr std::size_t n_y = 41;
  std::vector<double> ys(n_y), g_peak(n_y, 0.0);
  for (std::size_t j = 0; j < n_y; ++j) ys[j] = lo + (hi - lo) * j / (n_y - 1.0);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < n_y; ++j)
      g_peak[j] = std::max(g_peak[j], std::abs(w.grad_x(s.t, s.x, ys[j])));
  }
  {
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < n_y; ++j) {
      if (std::abs(ys[j]) < 1.0 || g_peak[j] <= 1e-300) continue;
      lx.push_back(std::log1p(std::abs(ys[j])));
      ly.push_back(std::log(g_peak[j]));
    }
    rep.r = lx.size() >= 2 ? std::max(0.0, detail::ls_slope(lx, ly)) : 0.0;
    for (std::size_t j = 0; j < n_y; ++j)
      rep.d3 = std::max(rep.d3, g_peak[j] / (1.0 + std::pow(std::abs(ys[j]), rep.r)));
  }

  // alpha(t) = sup_{x,y} |dW/dt| / (1 + x^2 + y^2) on a time grid.
  {
    constexpr std::size_t n_t = 129;
    std::vector<double> alpha(n_t, 0.0);
    for (std::size_t k = 0; k < n_t; ++k) {
      const double t = T * k / (n_t - 1.0);
      for (std::size_t i = 0; i < std::min<std::size_t>(samples.size(), 400); ++i) {
        const auto& s = samples[i];
        alpha[k] = std::max(alpha[k], std::abs(w.dt(t, s.x, s.y)) / (1.0 + s.x * s.x + s.y * s.y));
      }
    }
    const double dt = T / (n_t - 1.0);
    for (std::size_t k = 0; k + 1 < n_t; ++k) rep.alpha_mass += 0.5 * dt * (alpha[k] + alpha[k + 1]);
  }

  // Lipschitz constant of W_t - W_bar from random and nearby pairs.
  {
    auto osc = [&](double t, double x, double y) { return w.eval(t, x, y) - w_bar.eval(0.0, x, y); };
    std::normal_distribution<double> jitter(0.0, 1e-3 * (hi - lo));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& a = samples[i];
      const auto& b = samples[(i * 7919 + 13) % samples.size()];
      double bx = b.x, by = b.y;
      if (i % 2 == 0) {
        bx = std::clamp(a.x + jitter(rng), lo, hi);
        by = std::clamp(a.y + jitter(rng), lo, hi);
      }
      const double dist = std::abs(a.x - bx) + std::abs(a.y - by);
      if (dist <= 1e-12) continue;
      rep.L = std::max(rep.L, std::abs(osc(a.t, a.x, a.y) - osc(a.t, bx, by)) / dist);
    }
  }

  const auto inf = std::numeric_limits<double>::infinity();
  auto add = [&](std::string name, double est, double ceiling, bool ok) {
    rep.checks.push_back({std::move(name), est, ceiling, ok ? CheckOutcome::pass : CheckOutcome::fail});
  };
  add("W1_symmetry", rep.symmetry_residual, 1e-12, rep.symmetry_residual <= 1e-12);
  add("W1_periodicity", rep.periodicity_residual, 1e-12, rep.periodicity_residual <= 1e-12);
  add("W2_growth_exponent", rep.growth_exponent_value, 2.05, rep.growth_exponent_value <= 2.05);
  add("W2_d1", rep.d1, inf, std::isfinite(rep.d1));
  add("W2_d2", rep.d2, inf, std::isfinite(rep.d2));
  add("W3_alpha_mass", rep.alpha_mass, inf, std::isfinite(rep.alpha_mass));
  add("W4_exponent_r", rep.r, 2.0, rep.r < 2.0);
  add("W4_d3", rep.d3, inf, std::isfinite(rep.d3));
  rep.checks.push_back({"W4_alpha_tilde", std::numeric_limits<double>::quiet_NaN(), inf,
                        CheckOutcome::not_checked});
  add("W5_growth_exponent", rep.growth_exponent_laplacian, 2.05,
      rep.growth_exponent_laplacian <= 2.05);
  add("W5_d4", rep.d4, inf, std::isfinite(rep.d4));
  add("W6_L", rep.L, inf, std::isfinite(rep.L));

  rep.notes.push_back("W4 alpha_tilde not checked");
  if (std::any_of(w.terms().begin(), w.terms().end(), detail::unbounded_oscillation))
    rep.notes.push_back("global (W6) fails off-domain");
  return rep;
}

inline const char* to_string(CheckOutcome o) {
  switch (o) {
    case CheckOutcome::pass: return "true";
    case CheckOutcome::fail: return "false";
    case CheckOutcome::not_checked: return "not_checked";
  }
  return "?";
}

}  // namespace mmflow

#endif  // MMFLOW_VALIDATION_HPP
