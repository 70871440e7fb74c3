#ifndef MMFLOW_MMS_ENGINE_HPP
#define MMFLOW_MMS_ENGINE_HPP

// Time-dependent minimizing movement scheme over an abstract metric space.
//
//   u_k in argmin_v  d^2(u_{k-1}, v) / (2 tau_k) + E(v) + P_{t_k}(v)
//
// The engine treats the minimizer oracle as exact and layers the runtime
// monitors on top: classical estimates, the De Giorgi interpolation, the
// discrete energy inequality and the Moreau-Yosida bounds. The local slope is
// never evaluated; its upper bound d(u, v) / tau at resolvent points is used
// instead.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmflow/error.hpp"
#include "mmflow/quadrature.hpp"
#include "mmflow/trajectory.hpp"

namespace mmflow {

template <class S>
concept MetricSpace = requires(const S& s, const typename S::Point& u) {
  { s.distance(u, u) } -> std::convertible_to<double>;
};

/// E (time independent), P_t and its time derivative.
template <class F, class Point>
concept PerturbedEnergy = requires(const F& f, const Point& u, double t) {
  { f.energy(u) } -> std::convertible_to<double>;
  { f.perturbation(t, u) } -> std::convertible_to<double>;
  { f.perturbation_dt(t, u) } -> std::convertible_to<double>;
};

/// solve(tau, t, u) returns an element of the resolvent J_{tau,t}(u).
template <class O, class Point>
concept MinimizerOracle = requires(O& o, double tau, double t, const Point& u) {
  { o.solve(tau, t, u) } -> std::convertible_to<Point>;
};

class TauSchedule {
 public:
  explicit TauSchedule(std::function<double(std::size_t)> step) : step_(std::move(step)) {}

  static TauSchedule uniform(double tau) {
    return TauSchedule([tau](std::size_t) { return tau; });
  }
  /// tau_k = min(tau0 * ratio^(k-1), tau_max).
  static TauSchedule geometric(double tau0, double ratio, double tau_max) {
    return TauSchedule([=](std::size_t k) {
      return std::min(tau0 * std::pow(ratio, static_cast<double>(k - 1)), tau_max);
    });
  }
  /// Explicit partition; the last entry repeats.
  static TauSchedule list(std::vector<double> taus) {
    require(!taus.empty(), "TauSchedule: empty list");
    return TauSchedule([taus = std::move(taus)](std::size_t k) {
      return taus[std::min(k - 1, taus.size() - 1)];
    });
  }

  /// Step size of step k >= 1.
  double operator()(std::size_t k) const { return step_(k); }

 private:
  std::function<double(std::size_t)> step_;
};

inline constexpr double kDefaultTauCap = 0.1;

template <class Space, class Energy, class Oracle>
  requires MetricSpace<Space> && PerturbedEnergy<Energy, typename Space::Point> &&
           MinimizerOracle<Oracle, typename Space::Point>
std::vector<StepRecord<typename Space::Point>> run_scheme(const Space& space, const Energy& energy,
                                                          Oracle& oracle,
                                                          typename Space::Point u0,
                                                          const TauSchedule& schedule, double T,
                                                          double tau_cap = kDefaultTauCap) {
  using Point = typename Space::Point;
  require(T > 0.0, "run_scheme: horizon must be positive");
  std::vector<StepRecord<Point>> records;
  {
    StepRecord<Point> r0{0, 0.0, 0.0, u0, 0.0, energy.energy(u0), energy.perturbation(0.0, u0), 0.0};
    records.push_back(std::move(r0));
  }
  double t = 0.0;
  for (std::size_t k = 1; t < T * (1.0 - 1e-12); ++k) {
    const double tau = schedule(k);
    require(tau > 0.0 && tau <= tau_cap,
            "run_scheme: step " + std::to_string(k) + " has tau outside (0, tau_cap]");
    const double t_next = t + tau;
    const Point& prev = records.back().u;
    Point next = [&]() -> Point {
      try {
        return oracle.solve(tau, t_next, prev);
      } catch (const Error& e) {
        throw Error(e.code(), "run_scheme: oracle failed at step " + std::to_string(k) + ": " + e.what());
      }
    }();
    const double d = space.distance(prev, next);
    const double e = energy.energy(next);
    const double p = energy.perturbation(t_next, next);
    StepRecord<Point> r{k, t_next, tau, std::move(next), d * d, e, p, d / tau};
    records.push_back(std::move(r));
    t = t_next;
  }
  return records;
}

/// Ceilings above which a classical-estimate monitor is flagged UNBOUNDED.
struct EstimateCeilings {
  double dissipation = 1e6;
  double energy = 1e6;
  double distance = 1e6;
  double second_moment = 1e6;
  double entropy = 1e6;
};

/// Constant bound on alpha of the perturbation's time regularity, enabling
/// the step-size smallness check sup_k 4 alpha_k < 1.
struct SmallnessInputs {
  double alpha = 0.0;
  double tau_star = 1.0;
};

struct DiagnosticsReport {
  double dissipation_sum = 0.0;  ///< sum_k d^2(u_{k-1}, u_k) / (2 tau_k)
  double max_energy = -std::numeric_limits<double>::infinity();
  double max_distance_sq = 0.0;  ///< max_k d^2(u_*, u_k)
  double max_second_moment = std::numeric_limits<double>::quiet_NaN();
  double max_abs_entropy = std::numeric_limits<double>::quiet_NaN();
  /// E(u_0) - E(u_N) + sum_k (P_{t_k}(u_{k-1}) - P_{t_k}(u_k)) - dissipation_sum;
  /// nonnegative for exact minimizers.
  double assembled_slack = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> smallness;  ///< sup_k 4 alpha_k when checked
  bool bounded = true;
  std::vector<std::string> flags;
  std::vector<std::string> notes;
};

template <class Space, class Energy>
  requires MetricSpace<Space> && PerturbedEnergy<Energy, typename Space::Point>
DiagnosticsReport classical_estimates(const Space& space, const Energy& energy,
                                      const std::vector<StepRecord<typename Space::Point>>& records,
                                      const typename Space::Point& u_star,
                                      const EstimateCeilings& ceilings = {},
                                      std::optional<SmallnessInputs> smallness = std::nullopt) {
  require(!records.empty(), "classical_estimates: no records");
  DiagnosticsReport rep;
  double perturbation_increments = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    rep.max_energy = std::max(rep.max_energy, r.energy);
    const double ds = space.distance(u_star, r.u);
    rep.max_distance_sq = std::max(rep.max_distance_sq, ds * ds);
    if (i == 0) continue;
    rep.dissipation_sum += r.d2_prev / (2.0 * r.tau);
    perturbation_increments += energy.perturbation(r.t, records[i - 1].u) - r.perturbation;
  }
  rep.assembled_slack =
      records.front().energy - records.back().energy + perturbation_increments - rep.dissipation_sum;

  if (rep.dissipation_sum > ceilings.dissipation) {
    rep.bounded = false;
    rep.flags.push_back("UNBOUNDED dissipation_sum");
  }
  if (rep.max_energy > ceilings.energy) {
    rep.bounded = false;
    rep.flags.push_back("UNBOUNDED max_energy");
  }
  if (rep.max_distance_sq > ceilings.distance) {
    rep.bounded = false;
    rep.flags.push_back("UNBOUNDED max_distance_sq");
  }
  if (smallness) {
    double sup = 0.0;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const double tau = records[i].tau;
      const double alpha_k = 0.5 * smallness->tau_star * smallness->alpha * tau + tau / smallness->tau_star;
      sup = std::max(sup, 4.0 * alpha_k);
    }
    rep.smallness = sup;
    if (sup >= 1.0) rep.flags.push_back("step sizes violate sup_k 4 alpha_k < 1");
  } else {
    rep.notes.push_back("step-size smallness check skipped: no alpha estimate supplied");
  }
  return rep;
}

/// Fractional-step interpolant: an element of J_{sigma, t_prev + sigma}(u_prev).
template <class Oracle, class Point>
  requires MinimizerOracle<Oracle, Point>
Point de_giorgi_interpolant(Oracle& oracle, const Point& u_prev, double t_prev, double sigma) {
  require(sigma > 0.0, "de_giorgi_interpolant: sigma must be positive");
  return oracle.solve(sigma, t_prev + sigma, u_prev);
}

struct EnergyInequalityStep {
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;  ///< max(0, lhs - rhs)
};

struct EnergyInequalityReport {
  std::vector<EnergyInequalityStep> steps;
  double max_violation = 0.0;
  double cumulative_violation = 0.0;  ///< max(0, summed lhs - summed rhs) at the final step
  double tolerance = 0.0;
  bool warn = false;
};

/// Per-step discrete energy inequality along the De Giorgi interpolation,
///
///   E(u_k) + P_{t_k}(u_k) + d^2(u_{k-1}, u_k)/(2 tau_k)
///     + 1/2 int_0^tau_k (d(u_{k-1}, u~(s)) / s)^2 ds
///   <= E(u_{k-1}) + P_{t_{k-1}}(u_{k-1}) + int_0^tau_k dP/dt(t_{k-1}+s, u~(s)) ds,
///
/// with the slope replaced by its upper bound d/s, so that both sides agree
/// up to quadrature and solver error. The sigma integrals use n_sub
/// Gauss-Legendre nodes.
template <class Space, class Energy, class Oracle>
  requires MetricSpace<Space> && PerturbedEnergy<Energy, typename Space::Point> &&
           MinimizerOracle<Oracle, typename Space::Point>
EnergyInequalityReport energy_inequality_check(
    const Space& space, const Energy& energy, Oracle& oracle,
    const std::vector<StepRecord<typename Space::Point>>& records, std::size_t n_sub,
    double relative_tolerance = 1e-6) {
  require(n_sub >= 2, "energy_inequality_check: n_sub must be >= 2");
  require(records.size() >= 2, "energy_inequality_check: need at least one step");
  EnergyInequalityReport rep;
  const auto& first = records.front();
  rep.tolerance = relative_tolerance * std::abs(first.energy + first.perturbation);
  const auto unit = gauss_legendre(n_sub, 0.0, 1.0);
  double lhs_sum = 0.0;
  double rhs_sum = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& prev = records[i - 1];
    const auto& cur = records[i];
    double slope_integral = 0.0;
    double dt_integral = 0.0;
    for (std::size_t q = 0; q < n_sub; ++q) {
      const double sigma = cur.tau * unit.nodes[q];
      const double w = cur.tau * unit.weights[q];
      const auto interp = de_giorgi_interpolant(oracle, prev.u, prev.t, sigma);
      const double d = space.distance(prev.u, interp);
      slope_integral += w * (d / sigma) * (d / sigma);
      dt_integral += w * energy.perturbation_dt(prev.t + sigma, interp);
    }
    EnergyInequalityStep s;
    s.k = cur.k;
    s.lhs = cur.energy + cur.perturbation + cur.d2_prev / (2.0 * cur.tau) + 0.5 * slope_integral;
    s.rhs = prev.energy + prev.perturbation + dt_integral;
    s.violation = std::max(0.0, s.lhs - s.rhs);
    rep.max_violation = std::max(rep.max_violation, s.violation);
    lhs_sum += s.lhs - prev.energy - prev.perturbation;
    rhs_sum += dt_integral;
    rep.steps.push_back(s);
  }
  rep.cumulative_violation = std::max(0.0, lhs_sum - rhs_sum);
  rep.warn = rep.max_violation > rep.tolerance;
  return rep;
}

/// Constants of the coercivity assumption: c_* <= inf_t inf_v
/// d^2(u_*, v) / (2 tau_*) + E(v) + P_t(v).
/// d2_to_star, when set, replaces d^2(u_*, .) for reference points the space
/// cannot represent (e.g. a Dirac mass among particle configurations).
template <class Point>
struct CoercivityConstants {
  double c_star = 0.0;
  double tau_star = 1.0;
  std::optional<Point> u_star;
  std::function<double(const Point&)> d2_to_star;
};

struct MoreauYosidaReport {
  std::vector<double> taus;
  std::vector<double> phi;        ///< phi(tau, t, u)
  std::vector<double> d2;         ///< d^2(u, v_tau)
  double energy_at_u = 0.0;       ///< E(u) + P_t(u)
  std::size_t monotonicity_violations = 0;
  std::size_t approximation_violations = 0;
  std::size_t upper_bound_violations = 0;
  std::size_t lower_bound_violations = 0;
  double max_violation = 0.0;

  std::size_t total_violations() const {
    return monotonicity_violations + approximation_violations + upper_bound_violations +
           lower_bound_violations;
  }
};

/// Checks on the Moreau-Yosida approximation phi(tau, t, u) = min_v Phi:
/// monotonicity phi(sigma) <= phi(tau) <= E(u) + P_t(u) for sigma >= tau, the
/// monotone approach phi(tau) -> E(u) + P_t(u) as tau decreases, and the
/// lower/upper bounds in terms of (c_*, tau_*, u_*).
template <class Space, class Energy, class Oracle>
  requires MetricSpace<Space> && PerturbedEnergy<Energy, typename Space::Point> &&
           MinimizerOracle<Oracle, typename Space::Point>
MoreauYosidaReport moreau_yosida_checks(const Space& space, const Energy& energy, Oracle& oracle,
                                        const typename Space::Point& u, double t,
                                        const std::vector<double>& tau_list,
                                        const CoercivityConstants<typename Space::Point>& constants,
                                        double tolerance = 1e-12) {
  require(!tau_list.empty(), "moreau_yosida_checks: empty tau list");
  require(std::is_sorted(tau_list.begin(), tau_list.end()),
          "moreau_yosida_checks: tau list must be increasing");
  require(tau_list.back() < constants.tau_star, "moreau_yosida_checks: need tau < tau_star");
  MoreauYosidaReport rep;
  rep.taus = tau_list;
  rep.energy_at_u = energy.energy(u) + energy.perturbation(t, u);
  require(constants.u_star.has_value() || static_cast<bool>(constants.d2_to_star),
          "moreau_yosida_checks: need u_star or d2_to_star");
  double d2_star = 0.0;
  if (constants.d2_to_star) {
    d2_star = constants.d2_to_star(u);
  } else {
    const double ds = space.distance(*constants.u_star, u);
    d2_star = ds * ds;
  }
  auto note = [&](std::size_t& counter, double excess) {
    if (excess > tolerance) {
      ++counter;
      rep.max_violation = std::max(rep.max_violation, excess);
    }
  };
  for (double tau : tau_list) {
    const auto v = oracle.solve(tau, t, u);
    const double d = space.distance(u, v);
    const double Phi = d * d / (2.0 * tau) + energy.energy(v) + energy.perturbation(t, v);
    rep.phi.push_back(Phi);
    rep.d2.push_back(d * d);
    const double ts = constants.tau_star;
    const double upper =
        4.0 * tau * ts / (ts - tau) * (Phi - constants.c_star + d2_star / (ts - tau));
    note(rep.upper_bound_violations, d * d - upper);
    note(rep.lower_bound_violations, constants.c_star - d2_star / (ts - tau) - Phi);
    note(rep.monotonicity_violations, Phi - rep.energy_at_u);
  }
  for (std::size_t i = 0; i < rep.phi.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.phi.size(); ++j) {
      // tau_j >= tau_i, so phi(tau_j) <= phi(tau_i).
      note(rep.monotonicity_violations, rep.phi[j] - rep.phi[i]);
    }
    if (i + 1 < rep.phi.size()) {
      const double gap_small = rep.energy_at_u - rep.phi[i];
      const double gap_large = rep.energy_at_u - rep.phi[i + 1];
      note(rep.approximation_violations, gap_small - gap_large);
    }
  }
  return rep;
}

}  // namespace mmflow

#endif  // MMFLOW_MMS_ENGINE_HPP
