#ifndef MMFLOW_JKO_HPP
#define MMFLOW_JKO_HPP

// JKO steps in quantile coordinates. For particles X (new) and Y (previous)
// of mass 1/M each, the step minimizes
//
//   Phi(X) = |X - Y|^2 / (2 tau M) + internal(X) + interaction_{omega t}(X)
//
// over strictly increasing X inside the domain; the 1D transport term is
// exact because the monotone coupling is optimal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mmflow/density.hpp"
#include "mmflow/energy.hpp"
#include "mmflow/error.hpp"
#include "mmflow/mms_engine.hpp"
#include "mmflow/trajectory.hpp"
#include "mmflow/transport.hpp"

namespace mmflow {

enum class InnerMethod {
  /// Descent along the inverse of the tridiagonal Hessian of the transport
  /// and internal-energy terms plus the positive part of the interaction
  /// curvature diagonal.
  preconditioned,
  /// Plain steepest descent with an adaptive initial trial step.
  gradient,
};

enum class StepStatus { converged, soft_warning, non_converged };

struct JkoConfig {
  std::size_t M = 400;
  TauSchedule tau = TauSchedule::uniform(1e-3);
  double T = 0.5;
  double inner_tol = 0.0;  ///< sup-norm gradient tolerance; 0 selects 1e-8 / M
  std::size_t inner_max_iter = 5000;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double tau_cap = kDefaultTauCap;
  InnerMethod method = InnerMethod::preconditioned;
  double domain_min = -std::numeric_limits<double>::infinity();
  double domain_max = std::numeric_limits<double>::infinity();
  double min_gap = 1e-14;

  double tolerance() const { return inner_tol > 0.0 ? inner_tol : 1e-8 / static_cast<double>(M); }

  /// Confines particles to the grid's interval with the grid's minimal gap.
  JkoConfig& with_domain(const Grid& grid) {
    domain_min = grid.x_min();
    domain_max = grid.x_max();
    min_gap = grid.min_gap();
    return *this;
  }
};

struct InnerResult {
  QuantileRep q;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  StepStatus status = StepStatus::converged;
};

namespace detail {

class JkoObjective {
 public:
  JkoObjective(std::span<const double> prev, double tau, double t, const EnergySpec& spec)
      : prev_(prev),
        tau_(tau),
        m_(spec.m),
        potential_(spec.potential),
        potential_time_(spec.potential_time(t)),
        M_(static_cast<double>(prev.size())) {}

  double value(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - prev_[i]) * (x[i] - prev_[i]);
    return s / (2.0 * tau_ * M_) + internal_energy(x, m_) +
           interaction_energy(x, potential_, potential_time_);
  }

  /// Phi(x + alpha d) - Phi(x), evaluated term by term to limit cancellation.
  double delta(std::span<const double> x, std::span<const double> d, double alpha,
               std::vector<double>& trial) const {
    double transport = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      transport += alpha * d[i] * (2.0 * (x[i] - prev_[i]) + alpha * d[i]);
    transport /= 2.0 * tau_ * M_;
    double internal = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      internal += gap_energy_delta(x[i + 1] - x[i], alpha * (d[i + 1] - d[i]), m_, M_);
    double interaction = 0.0;
    if (!potential_.empty()) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * d[i];
      interaction = interaction_energy(trial, potential_, potential_time_) -
                    interaction_energy(x, potential_, potential_time_);
    }
    return transport + internal + interaction;
  }

  void gradient(std::span<const double> x, std::span<double> grad, std::span<double> curv) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    if (!curv.empty()) std::fill(curv.begin(), curv.end(), 0.0);
    const double inv = 1.0 / (tau_ * M_);
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] = (x[i] - prev_[i]) * inv;
    internal_gradient(x, m_, grad);
    interaction_gradient(x, potential_, potential_time_, grad, curv);
  }

  /// Solves P d = -g with P the tridiagonal local Hessian (Thomas algorithm).
  void preconditioned_direction(std::span<const double> x, std::span<const double> grad,
                                std::span<const double> curv, std::span<double> d) const {
    const std::size_t n = x.size();
    std::vector<double> diag(n, 1.0 / (tau_ * M_));
    std::vector<double> off(n, 0.0);  // off[i] couples i and i + 1
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double f2 = gap_energy_d2(x[i + 1] - x[i], m_, M_);
      diag[i] += f2;
      diag[i + 1] += f2;
      off[i] = -f2;
    }
    for (std::size_t i = 0; i < n; ++i) diag[i] += std::max(0.0, curv[i]);
    std::vector<double> c(n, 0.0);
    std::vector<double> r(n, 0.0);
    c[0] = off[0] / diag[0];
    r[0] = -grad[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = diag[i] - off[i - 1] * c[i - 1];
      c[i] = (i + 1 < n) ? off[i] / denom : 0.0;
      r[i] = (-grad[i] - off[i - 1] * r[i - 1]) / denom;
    }
    d[n - 1] = r[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = r[i] - c[i] * d[i + 1];
  }

  double transport_curvature() const { return 1.0 / (tau_ * M_); }

 private:
  std::span<const double> prev_;
  double tau_;
  double m_;
  const TimePotential& potential_;
  double potential_time_;
  double M_;
};

inline double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace detail

/// One JKO step by Armijo-backtracked descent from the warm start q_prev.
/// Every trial step is clipped so that all gaps stay above cfg.min_gap and
/// all particles inside the domain. Never throws on non-convergence; the
/// status reports it.
inline InnerResult solve_jko_step(const QuantileRep& q_prev, double tau, double t,
                                  const EnergySpec& spec, const JkoConfig& cfg) {
  require(tau > 0.0, "jko_step: tau must be positive");
  const std::size_t n = q_prev.size();
  const auto prev = q_prev.positions();
  detail::JkoObjective obj(prev, tau, t, spec);
  const double tol = cfg.tolerance();
  const bool precondition = cfg.method == InnerMethod::preconditioned;

  std::vector<double> x(prev.begin(), prev.end());
  std::vector<double> grad(n), curv(precondition ? n : 0), dir(n), trial(n), trial_grad(n);
  std::vector<double> trial_curv;
  double alpha_gd = tau * static_cast<double>(n);
  double gn = 0.0;
  std::size_t iter = 0;
  for (;; ++iter) {
    obj.gradient(x, grad, curv);
    gn = detail::sup_norm(grad);
    if (gn <= tol || iter >= cfg.inner_max_iter) break;

    if (precondition) {
      obj.preconditioned_direction(x, grad, curv, dir);
    } else {
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += grad[i] * dir[i];
    if (!(slope < 0.0)) break;

    // Fraction-to-boundary clipping of the step length.
    double alpha_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dg = dir[i + 1] - dir[i];
      if (dg < 0.0) alpha_max = std::min(alpha_max, 0.99 * (x[i + 1] - x[i] - cfg.min_gap) / -dg);
    }
    if (dir[0] < 0.0 && std::isfinite(cfg.domain_min))
      alpha_max = std::min(alpha_max, 0.99 * (x[0] - cfg.domain_min) / -dir[0]);
    if (dir[n - 1] > 0.0 && std::isfinite(cfg.domain_max))
      alpha_max = std::min(alpha_max, 0.99 * (cfg.domain_max - x[n - 1]) / dir[n - 1]);

    double alpha = std::min(precondition ? 1.0 : alpha_gd, alpha_max);
    const double phi = obj.value(x);
    bool accepted = false;
    for (int bt = 0; bt < 60 && alpha > 0.0; ++bt) {
      const double predicted = cfg.armijo_c * alpha * slope;
      const double change = obj.delta(x, dir, alpha, trial);
      if (change <= predicted) {
        accepted = true;
      } else if (-predicted < 1e-14 * (1.0 + std::abs(phi))) {
        // Decrease below the roundoff of Phi: accept on gradient reduction.
        for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + alpha * dir[i];
        obj.gradient(trial, trial_grad, trial_curv);
        accepted = detail::sup_norm(trial_grad) < gn;
      }
      if (accepted) break;
      alpha *= cfg.armijo_shrink;
    }
    if (!accepted) break;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * dir[i];
    if (!precondition) alpha_gd = 2.0 * alpha;
  }

  InnerResult res{QuantileRep(std::move(x)), iter, gn, StepStatus::converged};
  if (gn > 100.0 * tol)
    res.status = StepStatus::non_converged;
  else if (gn > tol)
    res.status = StepStatus::soft_warning;
  return res;
}

/// Resolvent element of the JKO step; throws non_converged when the inner
/// solve ends with gradient sup-norm above 100 * tolerance.
inline QuantileRep jko_step(const QuantileRep& q_prev, double tau, double t, const EnergySpec& spec,
                            const JkoConfig& cfg) {
  auto res = solve_jko_step(q_prev, tau, t, spec, cfg);
  if (res.status == StepStatus::non_converged) {
    throw Error(ErrorCode::non_converged,
                "jko_step: inner solver stopped at gradient norm " + std::to_string(res.grad_norm) +
                    " after " + std::to_string(res.iterations) + " iterations");
  }
  return std::move(res.q);
}

/// (P_2, W_2) restricted to equal-mass particle configurations.
struct WassersteinSpace {
  using Point = QuantileRep;
  double distance(const QuantileRep& a, const QuantileRep& b) const { return w2_distance(a, b); }
};

/// E = internal energy, P_t = interaction energy with the potential at omega t.
struct FreeEnergyFunctional {
  EnergySpec spec;

  double energy(const QuantileRep& q) const { return internal_energy(q, spec.m); }
  double perturbation(double t, const QuantileRep& q) const {
    return interaction_energy(q, spec.potential, spec.potential_time(t));
  }
  double perturbation_dt(double t, const QuantileRep& q) const {
    return spec.omega * interaction_energy_dt(q.positions(), spec.potential, spec.potential_time(t));
  }
};

/// JKO resolvent as a minimizer oracle for the abstract engine.
struct JkoOracle {
  EnergySpec spec;
  JkoConfig cfg;
  std::size_t soft_warnings = 0;

  QuantileRep solve(double tau, double t, const QuantileRep& u) {
    auto res = solve_jko_step(u, tau, t, spec, cfg);
    if (res.status == StepStatus::non_converged) {
      throw Error(ErrorCode::non_converged,
                  "jko_step: gradient norm " + std::to_string(res.grad_norm) + " after " +
                      std::to_string(res.iterations) + " iterations");
    }
    if (res.status == StepStatus::soft_warning) ++soft_warnings;
    return std::move(res.q);
  }
};

/// Full trajectory from rho0 to cfg.T. Particles are confined to rho0's grid.
inline Trajectory run_jko(const Density& rho0, const EnergySpec& spec, JkoConfig cfg) {
  cfg.with_domain(rho0.grid());
  JkoOracle oracle{spec, cfg};
  const auto q0 = density_to_quantiles(rho0, cfg.M);
  require(std::isfinite(total_energy(q0, spec, 0.0)), "run_jko: initial energy is not finite");
  Trajectory traj;
  traj.records = run_scheme(WassersteinSpace{}, FreeEnergyFunctional{spec}, oracle, q0, cfg.tau,
                            cfg.T, cfg.tau_cap);
  traj.soft_warnings = oracle.soft_warnings;
  traj.snapshots.reserve(traj.records.size());
  for (const auto& r : traj.records) {
    traj.snapshots.push_back(Snapshot{r.t, r.u, quantiles_to_density(r.u, rho0.grid())});
  }
  return traj;
}

/// Smooth test function with its first two derivatives.
struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  /// psi(x) = exp(-(x - c)^2 / w^2).
  static TestFunction gaussian_bump(double center = 0.0, double width = 1.0) {
    const double iw2 = 1.0 / (width * width);
    return {[=](double x) { return std::exp(-(x - center) * (x - center) * iw2); },
            [=](double x) {
              const double y = x - center;
              return -2.0 * y * iw2 * std::exp(-y * y * iw2);
            },
            [=](double x) {
              const double y = x - center;
              return (4.0 * y * y * iw2 - 2.0) * iw2 * std::exp(-y * y * iw2);
            }};
  }
  static TestFunction constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  }
};

/// |LHS - RHS| of the discrete Euler-Lagrange equation of a JKO step tested
/// against psi, with X = q_next and Y = q_prev under the monotone coupling:
///
///   LHS = (1/M^2) sum_ij d_x W(X_i, X_j) psi'(X_i) - int psi'' rho^m
///   RHS = -(1/(tau M)) sum_i (X_i - Y_i) psi'(X_i)
///
/// The rho^m integral uses the gap-based density, on which psi'' integrates
/// exactly to differences of psi'.
inline double euler_lagrange_residual(const QuantileRep& q_next, const QuantileRep& q_prev,
                                      double tau, double t, const EnergySpec& spec,
                                      const TestFunction& psi) {
  require(q_next.size() == q_prev.size(), "euler_lagrange_residual: particle counts differ");
  const auto x = q_next.positions();
  const auto y = q_prev.positions();
  const std::size_t n = x.size();
  const double M = static_cast<double>(n);
  std::vector<double> dpsi(n);
  for (std::size_t i = 0; i < n; ++i) dpsi[i] = psi.d1(x[i]);

  std::vector<double> ig(n, 0.0);
  interaction_gradient(x, spec.potential, spec.potential_time(t), ig);
  double interaction = 0.0;
  for (std::size_t i = 0; i < n; ++i) interaction += ig[i] * dpsi[i];
  double diffusion = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double rho_m = -detail::gap_energy_d1(x[i + 1] - x[i], spec.m, M);
    diffusion += rho_m * (dpsi[i + 1] - dpsi[i]);
  }
  double transport = 0.0;
  for (std::size_t i = 0; i < n; ++i) transport += (x[i] - y[i]) * dpsi[i];
  const double lhs = interaction - diffusion;
  const double rhs = -transport / (tau * M);
  return std::abs(lhs - rhs);
}

/// Classical estimates along a JKO trajectory: dissipation, energy, second
/// moment and entropy monitors plus the assembled one-step descent slack.
inline DiagnosticsReport classical_estimates_fp(const Trajectory& traj, const EnergySpec& spec,
                                                const EstimateCeilings& ceilings = {}) {
  require(!traj.records.empty(), "classical_estimates_fp: empty trajectory");
  DiagnosticsReport rep;
  rep.max_second_moment = 0.0;
  rep.max_abs_entropy = 0.0;
  const FreeEnergyFunctional f{spec};
  double increments = 0.0;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    rep.max_energy = std::max(rep.max_energy, r.energy);
    rep.max_second_moment = std::max(rep.max_second_moment, r.u.second_moment());
    rep.max_abs_entropy = std::max(rep.max_abs_entropy, std::abs(entropy(r.u)));
    if (i == 0) continue;
    rep.dissipation_sum += r.d2_prev / (2.0 * r.tau);
    increments += f.perturbation(r.t, traj.records[i - 1].u) - r.perturbation;
  }
  rep.max_distance_sq = rep.max_second_moment;  // distance to the Dirac mass at 0
  rep.assembled_slack = traj.records.front().energy - traj.records.back().energy + increments -
                        rep.dissipation_sum;
  auto check = [&](double value, double ceiling, const char* name) {
    if (value > ceiling) {
      rep.bounded = false;
      rep.flags.push_back(std::string("UNBOUNDED ") + name);
    }
  };
  check(rep.dissipation_sum, ceilings.dissipation, "dissipation_sum");
  check(rep.max_energy, ceilings.energy, "max_energy");
  check(rep.max_second_moment, ceilings.second_moment, "max_second_moment");
  check(rep.max_abs_entropy, ceilings.entropy, "max_abs_entropy");
  return rep;
}

/// sum_k tau_k (|grad rho_k^{m/2}|^2_{L2} + (m - 1) U_m(rho_k)) over steps k >= 1.
inline double h1_monitor(const Trajectory& traj, const EnergySpec& spec) {
  require(!traj.records.empty(), "h1_monitor: empty trajectory");
  double s = 0.0;
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    double term = h1_seminorm(traj.records[k].u, spec.m);
    if (spec.m > 1.0) term += (spec.m - 1.0) * internal_energy(traj.records[k].u, spec.m);
    s += traj.records[k].tau * term;
  }
  return s;
}

}  // namespace mmflow

#endif  // MMFLOW_JKO_HPP
