#ifndef MMFLOW_TRANSPORT_HPP
#define MMFLOW_TRANSPORT_HPP

// Exact 1D L2-Wasserstein distance: the monotone (sorted) coupling is optimal,
// so W2 is the L2 distance between quantile functions.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mmflow/density.hpp"
#include "mmflow/error.hpp"
#include "mmflow/trajectory.hpp"

namespace mmflow {

inline double w2_distance_squared(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "w2_distance: particle counts differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

inline double w2_distance(const QuantileRep& a, const QuantileRep& b) {
  return std::sqrt(w2_distance_squared(a.positions(), b.positions()));
}

inline double w2_distance_density(const Density& a, const Density& b, std::size_t M) {
  return w2_distance(density_to_quantiles(a, M), density_to_quantiles(b, M));
}

/// Empirical 1/2-Hoelder constant max_{s<t} W2(rho(s), rho(t)) / sqrt(t - s)
/// over all snapshot pairs, compared at resolution M.
inline double holder_modulus(const Trajectory& traj, std::size_t M) {
  require(traj.size() >= 3, "holder_modulus: need at least 3 snapshots");
  std::vector<QuantileRep> q;
  q.reserve(traj.size());
  for (const auto& s : traj.snapshots) {
    q.push_back(s.particles.size() == M ? s.particles : density_to_quantiles(s.density, M));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      const double dt = traj.snapshots[j].t - traj.snapshots[i].t;
      if (dt <= 0.0) continue;
      best = std::max(best, w2_distance(q[i], q[j]) / std::sqrt(dt));
    }
  }
  return best;
}

}  // namespace mmflow

#endif  // MMFLOW_TRANSPORT_HPP
