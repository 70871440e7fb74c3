#ifndef MMFLOW_HIGHFREQ_HPP
#define MMFLOW_HIGHFREQ_HPP

// Frequency sweeps: distance between the flow driven by W_{omega t} and the
// flow driven by the time-averaged potential, and log-log rate fits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mmflow/density.hpp"
#include "mmflow/energy.hpp"
#include "mmflow/error.hpp"
#include "mmflow/euclidean_demo.hpp"
#include "mmflow/jko.hpp"
#include "mmflow/mms_engine.hpp"
#include "mmflow/potentials.hpp"
#include "mmflow/trajectory.hpp"
#include "mmflow/transport.hpp"

namespace mmflow {

struct RateFit {
  double slope = 0.0;
  double constant = 0.0;
};

/// Least squares of log e against log omega over points with e > 1e-14.
inline RateFit fit_rate(const std::vector<double>& omegas, const std::vector<double>& errors) {
  require(omegas.size() == errors.size(), "fit_rate: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (errors[i] > 1e-14 && omegas[i] > 0.0) {
      lx.push_back(std::log(omegas[i]));
      ly.push_back(std::log(errors[i]));
    }
  }
  if (lx.size() < 3) {
    throw Error(ErrorCode::insufficient_points,
                "fit_rate: need at least 3 points above the noise floor, got " +
                    std::to_string(lx.size()));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, "fit_rate: omegas must not all coincide", ErrorCode::insufficient_points);
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.constant = std::exp(my - fit.slope * mx);
  return fit;
}

struct SweepResult {
  std::vector<double> omegas;
  std::vector<double> errors;  ///< max over shared snapshot times of the distance to the averaged flow
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double fitted_constant = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> notes;
};

namespace detail {

/// Fit over the upper half of the sweep; the fit is left NaN (with a note)
/// when too few points clear the noise floor.
inline void fit_upper_half(SweepResult& res) {
  const std::size_t start = res.omegas.size() / 2;
  std::vector<double> w(res.omegas.begin() + static_cast<std::ptrdiff_t>(start), res.omegas.end());
  std::vector<double> e(res.errors.begin() + static_cast<std::ptrdiff_t>(start), res.errors.end());
  try {
    const auto fit = fit_rate(w, e);
    res.fitted_slope = fit.slope;
    res.fitted_constant = fit.constant;
  } catch (const Error& err) {
    if (err.code() != ErrorCode::insufficient_points) throw;
    res.notes.push_back(err.what());
  }
}

inline void check_omegas(const std::vector<double>& omegas) {
  require(!omegas.empty(), "sweep: omegas must be nonempty");
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    require(omegas[i] > 0.0, "sweep: omegas must be positive");
    if (i > 0) require(omegas[i] > omegas[i - 1], "sweep: omegas must be strictly increasing");
  }
}

/// Runs job(i) for i < n on up to `threads` workers. The first exception is
/// rethrown after all workers finish.
template <class Job>
void parallel_for(std::size_t n, std::size_t threads, Job job) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace detail

/// JKO sweep together with the underlying trajectories.
struct JkoSweep {
  SweepResult result;
  Trajectory averaged;
  std::vector<Trajectory> runs;  ///< one per omega, same order
  /// Per-omega failure message; empty when the run completed.
  std::vector<std::string> failures;
};

/// Runs the averaged problem and one problem per omega with the shared
/// configuration. Runs execute concurrently; results are stored by index, so
/// the output does not depend on scheduling. A failed omega run leaves its
/// error as NaN and its message in `failures`.
inline JkoSweep sweep_omega_runs(const Density& rho0, const TimePotential& potential, double m,
                                 const std::vector<double>& omegas, const JkoConfig& cfg,
                                 std::size_t threads = detail::default_threads()) {
  detail::check_omegas(omegas);
  JkoSweep sweep;
  sweep.result.omegas = omegas;
  sweep.result.errors.assign(omegas.size(), std::numeric_limits<double>::quiet_NaN());
  sweep.runs.resize(omegas.size());
  sweep.failures.assign(omegas.size(), "");

  const EnergySpec averaged_spec(m, average_potential(potential), 1.0);
  // Job 0 is the averaged reference; job i + 1 is omega i.
  detail::parallel_for(omegas.size() + 1, threads, [&](std::size_t job) {
    if (job == 0) {
      sweep.averaged = run_jko(rho0, averaged_spec, cfg);
      return;
    }
    const std::size_t i = job - 1;
    try {
      sweep.runs[i] = run_jko(rho0, EnergySpec(m, potential, omegas[i]), cfg);
    } catch (const Error& e) {
      sweep.failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!sweep.failures[i].empty()) continue;
    const auto& run = sweep.runs[i];
    require(run.size() == sweep.averaged.size(), "sweep: snapshot grids differ");
    double e = 0.0;
    for (std::size_t k = 0; k < run.size(); ++k)
      e = std::max(e, w2_distance(run.snapshots[k].particles, sweep.averaged.snapshots[k].particles));
    sweep.result.errors[i] = e;
  }
  detail::fit_upper_half(sweep.result);
  return sweep;
}

inline SweepResult sweep_omega(const Density& rho0, const TimePotential& potential, double m,
                               const std::vector<double>& omegas, const JkoConfig& cfg,
                               std::size_t threads = detail::default_threads()) {
  auto sweep = sweep_omega_runs(rho0, potential, m, omegas, cfg, threads);
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!sweep.failures[i].empty()) throw Error(ErrorCode::non_converged, sweep.failures[i]);
  }
  return std::move(sweep.result);
}

struct EuclideanSweep {
  SweepResult scheme;    ///< scheme iterates against the averaged scheme
  SweepResult analytic;  ///< exact ODE solutions at the same times
  std::vector<std::vector<StepRecord<EuclideanPoint>>> runs;
};

/// Euclidean demo sweep: scheme and exact errors at the shared times t_k = k tau.
inline EuclideanSweep sweep_omega_euclidean(const EuclideanPoint& u0, double eps,
                                            const std::vector<double>& b,
                                            const std::vector<double>& omegas, double tau, double T) {
  detail::check_omegas(omegas);
  EuclideanSweep out;
  out.scheme.omegas = omegas;
  out.analytic.omegas = omegas;
  const EuclideanSpace space;
  const TauSchedule schedule = TauSchedule::uniform(tau);

  EuclideanDemo averaged(0.0, b, 1.0);
  const auto ref = run_scheme(space, averaged, averaged, u0, schedule, T, std::max(tau, kDefaultTauCap));
  for (double omega : omegas) {
    EuclideanDemo demo(eps, b, omega);
    auto recs = run_scheme(space, demo, demo, u0, schedule, T, std::max(tau, kDefaultTauCap));
    double e_scheme = 0.0, e_exact = 0.0;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      e_scheme = std::max(e_scheme, space.distance(recs[k].u, ref[k].u));
      const double t = recs[k].t;
      e_exact = std::max(e_exact, space.distance(demo.exact_solution(u0, t),
                                                 EuclideanDemo::averaged_solution(u0, t)));
    }
    out.scheme.errors.push_back(e_scheme);
    out.analytic.errors.push_back(e_exact);
    out.runs.push_back(std::move(recs));
  }
  detail::fit_upper_half(out.scheme);
  detail::fit_upper_half(out.analytic);
  return out;
}

}  // namespace mmflow

#endif  // MMFLOW_HIGHFREQ_HPP
