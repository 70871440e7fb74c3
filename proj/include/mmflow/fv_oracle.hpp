#ifndef MMFLOW_FV_ORACLE_HPP
#define MMFLOW_FV_ORACLE_HPP

// Explicit finite volumes for
//
//   d_t rho = d_xx rho^m + d_x(rho d_x(W_{omega t} * rho))
//
// with a central flux for the diffusion, upwinding for the nonlocal drift and
// zero flux through the domain ends. Each step is conservative and, under the
// CFL restriction, a convex combination of old cell values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "mmflow/density.hpp"
#include "mmflow/energy.hpp"
#include "mmflow/error.hpp"
#include "mmflow/trajectory.hpp"
#include "mmflow/transport.hpp"

namespace mmflow {

namespace detail {

/// Cell velocities v_j = -sum_l h d_x W(x_j, x_l) rho_l, with each term's
/// spatial factor assembled once and scaled by its profile a(omega t).
class FvDrift {
 public:
  FvDrift(const Grid& grid, const TimePotential& w) : grid_(grid), w_(w) {
    const std::size_t n = grid.n_cells();
    x_.resize(n);
    for (std::size_t j = 0; j < n; ++j) x_[j] = grid.center(j);
    for (const auto& term : w.terms()) {
      Assembled a;
      if (std::holds_alternative<ConstantKernel>(term.kernel)) {
        a.kind = Kind::none;
      } else if (std::holds_alternative<QuadraticKernel>(term.kernel)) {
        a.kind = Kind::quadratic;
      } else if (const auto* sep = std::get_if<SeparableKernel>(&term.kernel)) {
        a.kind = Kind::separable;
        a.one_body.resize(n);
        for (std::size_t j = 0; j < n; ++j) a.one_body[j] = sep->v.d1(x_[j]);
      } else {
        a.kind = Kind::matrix;
        a.matrix.resize(n * n);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t l = 0; l < n; ++l)
            a.matrix[j * n + l] = grid.h() * kernel::grad_x(term.kernel, x_[j], x_[l]);
      }
      assembled_.push_back(std::move(a));
    }
  }

  void velocity(double potential_time, const std::vector<double>& rho, std::vector<double>& v) const {
    const std::size_t n = rho.size();
    const double h = grid_.h();
    std::fill(v.begin(), v.end(), 0.0);
    double mass = 0.0, first = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      mass += h * rho[l];
      first += h * rho[l] * x_[l];
    }
    for (std::size_t k = 0; k < assembled_.size(); ++k) {
      const auto& a = assembled_[k];
      const double c = w_.terms()[k].profile(potential_time);
      if (c == 0.0) continue;
      switch (a.kind) {
        case Kind::none:
          break;
        case Kind::quadratic:
          for (std::size_t j = 0; j < n; ++j) v[j] -= c * (x_[j] * mass - first);
          break;
        case Kind::separable:
          for (std::size_t j = 0; j < n; ++j) v[j] -= c * a.one_body[j] * mass;
          break;
        case Kind::matrix:
          for (std::size_t j = 0; j < n; ++j) {
            const double* row = &a.matrix[j * n];
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += row[l] * rho[l];
            v[j] -= c * s;
          }
          break;
      }
    }
  }

 private:
  enum class Kind { none, quadratic, separable, matrix };
  struct Assembled {
    Kind kind = Kind::none;
    std::vector<double> one_body;
    std::vector<double> matrix;
  };
  Grid grid_;
  const TimePotential& w_;
  std::vector<double> x_;
  std::vector<Assembled> assembled_;
};

}  // namespace detail

/// States at each of the increasing times (all > 0), integrating from t = 0.
inline std::vector<Density> fv_snapshots(const Density& rho0, const EnergySpec& spec,
                                         const std::vector<double>& times,
                                         double cfl_safety = 0.4) {
  require(cfl_safety > 0.0 && cfl_safety <= 0.5, "fv_run: cfl_safety must be in (0, 0.5]");
  require(std::is_sorted(times.begin(), times.end()), "fv_run: times must be increasing");
  const Grid& grid = rho0.grid();
  const std::size_t n = grid.n_cells();
  const double h = grid.h();
  const double m = spec.m;
  detail::FvDrift drift(grid, spec.potential);

  std::vector<double> rho(rho0.values().begin(), rho0.values().end());
  std::vector<double> v(n), flux(n + 1, 0.0), pressure(n);
  std::vector<Density> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double target : times) {
    while (t < target) {
      drift.velocity(spec.potential_time(t), rho, v);
      double max_diff = 0.0, max_v = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        pressure[j] = m == 1.0 ? rho[j] : std::pow(rho[j], m);
        max_diff = std::max(max_diff, m * (m == 1.0 ? 1.0 : std::pow(rho[j], m - 1.0)));
      }
      for (std::size_t j = 0; j + 1 < n; ++j)
        max_v = std::max(max_v, std::abs(0.5 * (v[j] + v[j + 1])));
      double dt = std::numeric_limits<double>::infinity();
      if (max_diff > 0.0) dt = std::min(dt, cfl_safety * h * h / (2.0 * max_diff));
      if (max_v > 0.0) dt = std::min(dt, cfl_safety * h / max_v);
      if (!std::isfinite(dt)) dt = target - t;
      if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::cfl_degenerate,
                    "fv_run: degenerate time step at t = " + std::to_string(t));
      }
      const bool last = t + dt >= target;
      if (last) dt = target - t;

      for (std::size_t j = 0; j + 1 < n; ++j) {
        const double vf = 0.5 * (v[j] + v[j + 1]);
        const double adv = vf > 0.0 ? vf * rho[j] : vf * rho[j + 1];
        flux[j + 1] = -(pressure[j + 1] - pressure[j]) / h + adv;
      }
      for (std::size_t j = 0; j < n; ++j) rho[j] -= dt / h * (flux[j + 1] - flux[j]);
      t = last ? target : t + dt;
    }
    for (double r : rho) {
      if (!std::isfinite(r)) throw Error(ErrorCode::cfl_degenerate, "fv_run: state blew up");
    }
    // Roundoff-level negatives only; the scheme is monotone under the CFL limit.
    std::vector<double> snap(rho);
    for (double& r : snap) r = std::max(r, 0.0);
    out.emplace_back(grid, std::move(snap));
  }
  return out;
}

inline Density fv_run(const Density& rho0, const EnergySpec& spec, double T, double cfl_safety = 0.4) {
  require(T > 0.0, "fv_run: T must be positive");
  return fv_snapshots(rho0, spec, {T}, cfl_safety).front();
}

struct CrossValidationReport {
  std::vector<double> times;
  std::vector<double> w2;
  double max_w2 = 0.0;
  double tol_w2 = 0.0;
  bool pass = false;
};

/// W2 between each JKO snapshot after the initial one and the finite-volume
/// state at the same time, started from rho0.
inline CrossValidationReport cross_validate(const Trajectory& traj, const Density& rho0,
                                            const EnergySpec& spec, double tol_w2,
                                            double cfl_safety = 0.4) {
  require(traj.size() >= 2, "cross_validate: trajectory needs at least one step");
  CrossValidationReport rep;
  rep.tol_w2 = tol_w2;
  for (std::size_t k = 1; k < traj.size(); ++k) rep.times.push_back(traj.snapshots[k].t);
  const auto fv = fv_snapshots(rho0, spec, rep.times, cfl_safety);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const auto& particles = traj.snapshots[k].particles;
    const double d = w2_distance(particles, density_to_quantiles(fv[k - 1], particles.size()));
    rep.w2.push_back(d);
    rep.max_w2 = std::max(rep.max_w2, d);
  }
  rep.pass = rep.max_w2 <= tol_w2;
  return rep;
}

/// Same, started from the deposited initial snapshot.
inline CrossValidationReport cross_validate(const Trajectory& traj, const EnergySpec& spec,
                                            double tol_w2, double cfl_safety = 0.4) {
  require(traj.size() >= 2, "cross_validate: trajectory needs at least one step");
  return cross_validate(traj, traj.snapshots.front().density, spec, tol_w2, cfl_safety);
}

}  // namespace mmflow

#endif  // MMFLOW_FV_ORACLE_HPP
