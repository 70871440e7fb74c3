#ifndef MMFLOW_ENERGY_HPP
#define MMFLOW_ENERGY_HPP

// Free energies in quantile coordinates.
//
// With particles X_1 < ... < X_M of mass 1/M, the gap-based density on
// (X_i, X_{i+1}) is rho_i = 1/(M g_i), g_i = X_{i+1} - X_i, and the internal
// energy becomes a sum of per-gap terms f(g_i) with f'(g) = -rho(g)^m.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mmflow/density.hpp"
#include "mmflow/error.hpp"
#include "mmflow/potentials.hpp"

namespace mmflow {

struct EnergySpec {
  double m = 1.0;
  TimePotential potential;
  double omega = 1.0;

  EnergySpec() = default;
  EnergySpec(double m_, TimePotential w, double omega_ = 1.0)
      : m(m_), potential(std::move(w)), omega(omega_) {
    require(m >= 1.0, "EnergySpec: m must be >= 1");
    require(omega > 0.0, "EnergySpec: omega must be positive");
  }

  /// Time at which the potential is sampled for physical time t.
  double potential_time(double t) const { return omega * t; }
};

namespace detail {

/// Per-gap internal energy f(g) for M particles.
inline double gap_energy(double g, double m, double M) {
  if (m == 1.0) return -std::log(M * g) / M;
  return std::pow(M * g, 1.0 - m) / ((m - 1.0) * M);
}

/// f'(g) = -rho^m with rho = 1/(M g).
inline double gap_energy_d1(double g, double m, double M) {
  const double rho = 1.0 / (M * g);
  return m == 1.0 ? -rho : -std::pow(rho, m);
}

/// f''(g) = m M rho^{m+1}.
inline double gap_energy_d2(double g, double m, double M) {
  const double rho = 1.0 / (M * g);
  return m == 1.0 ? M * rho * rho : m * M * std::pow(rho, m + 1.0);
}

/// f(g + dg) - f(g) without cancellation.
inline double gap_energy_delta(double g, double dg, double m, double M) {
  const double r = std::log1p(dg / g);
  if (m == 1.0) return -r / M;
  return std::pow(M * g, 1.0 - m) * std::expm1((1.0 - m) * r) / ((m - 1.0) * M);
}

/// sum_{i,j} K(x_i, x_j).
inline double kernel_pair_sum(const SpatialKernel& k, std::span<const double> x) {
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  if (const auto* c = std::get_if<ConstantKernel>(&k)) return c->c * dn * dn;
  if (std::holds_alternative<QuadraticKernel>(k)) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= dn;
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return dn * s;
  }
  if (const auto* sep = std::get_if<SeparableKernel>(&k)) {
    double s = 0.0;
    for (double v : x) s += sep->v.value(v);
    return 2.0 * dn * s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) row += kernel::eval(k, x[i], x[j]);
    s += kernel::eval(k, x[i], x[i]) + 2.0 * row;
  }
  return s;
}

/// grad[i] += scale * sum_j d_x K(x_i, x_j); curv[i] likewise with the second
/// derivative when curv is nonempty.
inline void accumulate_kernel_derivatives(const SpatialKernel& k, std::span<const double> x,
                                          double scale, std::span<double> grad,
                                          std::span<double> curv) {
  const std::size_t n = x.size();
  const double dn = static_cast<double>(n);
  if (std::holds_alternative<ConstantKernel>(k)) return;
  if (std::holds_alternative<QuadraticKernel>(k)) {
    double sum = 0.0;
    for (double v : x) sum += v;
    for (std::size_t i = 0; i < n; ++i) grad[i] += scale * (dn * x[i] - sum);
    if (!curv.empty())
      for (std::size_t i = 0; i < n; ++i) curv[i] += scale * dn;
    return;
  }
  if (const auto* sep = std::get_if<SeparableKernel>(&k)) {
    for (std::size_t i = 0; i < n; ++i) grad[i] += scale * dn * sep->v.d1(x[i]);
    if (!curv.empty())
      for (std::size_t i = 0; i < n; ++i) curv[i] += scale * dn * sep->v.d2(x[i]);
    return;
  }
  if (const auto* g = std::get_if<GaussianKernel>(&k)) {
    // d_x K(x, y) is odd and d_xx K(x, y) even in x - y.
    const double inv_s2 = 1.0 / (g->s * g->s);
    std::vector<double> gsum(n, 0.0);
    std::vector<double> csum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      csum[i] += inv_s2;  // self pair
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = x[i] - x[j];
        const double e = std::exp(-0.5 * d * d * inv_s2);
        const double gd = d * inv_s2 * e;
        gsum[i] += gd;
        gsum[j] -= gd;
        const double cd = (1.0 - d * d * inv_s2) * inv_s2 * e;
        csum[i] += cd;
        csum[j] += cd;
      }
    }
    for (std::size_t i = 0; i < n; ++i) grad[i] += scale * gsum[i];
    if (!curv.empty())
      for (std::size_t i = 0; i < n; ++i) curv[i] += scale * csum[i];
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double gs = 0.0;
    double cs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      gs += kernel::grad_x(k, x[i], x[j]);
      if (!curv.empty()) cs += kernel::lap_x(k, x[i], x[j]);
    }
    grad[i] += scale * gs;
    if (!curv.empty()) curv[i] += scale * cs;
  }
}

}  // namespace detail

/// Discrete entropy (m = 1) or (1/(m-1)) int rho^m (m > 1) over the M-1 gaps.
inline double internal_energy(std::span<const double> x, double m) {
  require(m >= 1.0, "internal_energy: m must be >= 1");
  const double M = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double g = x[i + 1] - x[i];
    require(g > 0.0, "internal_energy: nonpositive gap");
    s += detail::gap_energy(g, m, M);
  }
  return s;
}
inline double internal_energy(const QuantileRep& q, double m) {
  return internal_energy(q.positions(), m);
}

/// Boltzmann entropy int rho log rho of the gap-based density.
inline double entropy(const QuantileRep& q) { return internal_energy(q, 1.0); }

/// (1/(2 M^2)) sum_{i,j} W_t(X_i, X_j), self pairs included.
inline double interaction_energy(std::span<const double> x, const TimePotential& w, double t) {
  const double M = static_cast<double>(x.size());
  double s = 0.0;
  for (const auto& term : w.terms()) s += term.profile(t) * detail::kernel_pair_sum(term.kernel, x);
  return s / (2.0 * M * M);
}
inline double interaction_energy(const QuantileRep& q, const TimePotential& w, double t) {
  return interaction_energy(q.positions(), w, t);
}

/// d/dt of the interaction energy at potential time t.
inline double interaction_energy_dt(std::span<const double> x, const TimePotential& w, double t) {
  const double M = static_cast<double>(x.size());
  double s = 0.0;
  for (const auto& term : w.terms()) {
    if (term.profile.is_constant()) continue;
    s += term.profile.derivative(t) * detail::kernel_pair_sum(term.kernel, x);
  }
  return s / (2.0 * M * M);
}

/// F_{t,omega} = internal + interaction with the potential sampled at omega t.
inline double total_energy(std::span<const double> x, const EnergySpec& spec, double t) {
  return internal_energy(x, spec.m) + interaction_energy(x, spec.potential, spec.potential_time(t));
}
inline double total_energy(const QuantileRep& q, const EnergySpec& spec, double t) {
  return total_energy(q.positions(), spec, t);
}

/// Interaction gradient (1/M^2) sum_j d_x W(X_i, X_j), optionally with the
/// matching second-derivative diagonal.
inline void interaction_gradient(std::span<const double> x, const TimePotential& w, double t,
                                 std::span<double> grad, std::span<double> curv = {}) {
  const double M = static_cast<double>(x.size());
  for (const auto& term : w.terms()) {
    const double a = term.profile(t);
    if (a == 0.0) continue;
    detail::accumulate_kernel_derivatives(term.kernel, x, a / (M * M), grad, curv);
  }
}

/// Internal-energy gradient: rho_i^m - rho_{i-1}^m (pressure jump at X_i).
inline void internal_gradient(std::span<const double> x, double m, std::span<double> grad) {
  const double M = static_cast<double>(x.size());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d1 = detail::gap_energy_d1(x[i + 1] - x[i], m, M);
    grad[i] -= d1;
    grad[i + 1] += d1;
  }
}

inline std::vector<double> energy_gradient(std::span<const double> x, const EnergySpec& spec,
                                           double t) {
  std::vector<double> g(x.size(), 0.0);
  internal_gradient(x, spec.m, g);
  interaction_gradient(x, spec.potential, spec.potential_time(t), g);
  return g;
}
inline std::vector<double> energy_gradient(const QuantileRep& q, const EnergySpec& spec,
                                           double t) {
  return energy_gradient(q.positions(), spec, t);
}

/// sum_j ((v_{j+1}^{m/2} - v_j^{m/2}) / h)^2 h over raw cell values.
inline double h1_seminorm(std::span<const double> values, double h, double m) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < values.size(); ++j) {
    const double d = (std::pow(values[j + 1], 0.5 * m) - std::pow(values[j], 0.5 * m)) / h;
    s += d * d * h;
  }
  return s;
}
inline double h1_seminorm(const Density& rho, double m) {
  return h1_seminorm(rho.values(), rho.grid().h(), m);
}

/// Same seminorm on the gap density 1/(M g_i), placed at gap midpoints.
/// Avoids the roughness that depositing onto a grid introduces.
inline double h1_seminorm(const QuantileRep& q, double m) {
  const auto x = q.positions();
  const double M = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i + 2 < x.size(); ++i) {
    const double a = std::pow(M * (x[i + 1] - x[i]), -0.5 * m);
    const double b = std::pow(M * (x[i + 2] - x[i + 1]), -0.5 * m);
    const double ds = 0.5 * (x[i + 2] - x[i]);
    s += (b - a) * (b - a) / ds;
  }
  return s;
}

}  // namespace mmflow

#endif  // MMFLOW_ENERGY_HPP
