#ifndef MMFLOW_TRAJECTORY_HPP
#define MMFLOW_TRAJECTORY_HPP

#include <cstddef>
#include <vector>

#include "mmflow/density.hpp"

namespace mmflow {

/// Per-step record of a minimizing-movement run. Point is the state type of
/// the metric space the scheme runs in.
template <class Point>
struct StepRecord {
  std::size_t k = 0;
  double t = 0.0;
  double tau = 0.0;
  Point u;
  double d2_prev = 0.0;      ///< d^2(u_{k-1}, u_k)
  double energy = 0.0;       ///< time-independent part E(u_k)
  double perturbation = 0.0; ///< P_{t_k}(u_k)
  double slope_bound = 0.0;  ///< d(u_{k-1}, u_k) / tau_k, bounds the local slope at u_k
};

struct Snapshot {
  double t = 0.0;
  QuantileRep particles;
  Density density;
};

/// Piecewise-constant-in-time JKO trajectory; snapshot k holds rho^k on
/// [t_k, t_{k+1}).
struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord<QuantileRep>> records;
  std::size_t soft_warnings = 0;

  std::size_t size() const { return snapshots.size(); }
  const Snapshot& back() const { return snapshots.back(); }
};

}  // namespace mmflow

#endif  // MMFLOW_TRAJECTORY_HPP
