#ifndef MMFLOW_CHECKS_HPP
#define MMFLOW_CHECKS_HPP

// Invariant suite on a stored JKO trajectory: discrete energy inequality,
// Moreau-Yosida bounds and classical estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmflow/energy.hpp"
#include "mmflow/jko.hpp"
#include "mmflow/mms_engine.hpp"
#include "mmflow/potentials.hpp"
#include "mmflow/trajectory.hpp"

namespace mmflow {

/// Lower bound of the interaction energy over all probability measures and
/// all times, or nullopt when none is available.
inline std::optional<double> interaction_lower_bound(const TimePotential& w) {
  double bound = 0.0;
  for (const auto& term : w.terms()) {
    double a_min = std::numeric_limits<double>::infinity();
    double a_max = -a_min;
    for (int i = 0; i <= 256; ++i) {
      const double a = term.profile(term.profile.period() * i / 256.0);
      a_min = std::min(a_min, a);
      a_max = std::max(a_max, a);
    }
    // Energy of the term is (a/2) int int K; bound it over the range of a.
    if (const auto* c = std::get_if<ConstantKernel>(&term.kernel)) {
      bound += 0.5 * std::min(a_min * c->c, a_max * c->c);
    } else if (std::holds_alternative<QuadraticKernel>(term.kernel)) {
      if (a_min < 0.0) return std::nullopt;
    } else if (std::holds_alternative<GaussianKernel>(term.kernel)) {
      bound -= 0.5 * std::max(a_max, 0.0);  // K in [-1, 0]
    } else if (const auto* sep = std::get_if<SeparableKernel>(&term.kernel)) {
      if (a_min < 0.0) return std::nullopt;
      if (sep->v.name == "quadratic") continue;
      if (sep->v.name == "double_well") {
        bound -= 0.25 * a_max;  // int v >= -1/4
        continue;
      }
      return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  return bound;
}

/// Coercivity constants with u_* the Dirac mass at 0, so d^2(u_*, u) is the
/// second moment. For m = 1, min over densities of M_2/(2 tau_*) + H is
/// -log(2 pi tau_*)/2; the particle entropy lives on a density of mass
/// (M-1)/M, which costs less than 1 in the bound.
inline std::optional<CoercivityConstants<QuantileRep>> wasserstein_coercivity(const EnergySpec& spec,
                                                                             double tau_star = 1.0) {
  const auto p = interaction_lower_bound(spec.potential);
  if (!p) return std::nullopt;
  CoercivityConstants<QuantileRep> c;
  c.tau_star = tau_star;
  const double entropy_part =
      spec.m == 1.0 ? std::min(0.0, -0.5 * std::log(2.0 * std::numbers::pi * tau_star)) - 1.0 : 0.0;
  c.c_star = entropy_part + *p;
  c.d2_to_star = [](const QuantileRep& q) { return q.second_moment(); };
  return c;
}

struct CheckSuiteReport {
  EnergyInequalityReport energy_inequality;
  std::vector<MoreauYosidaReport> moreau_yosida;
  DiagnosticsReport estimates;
  bool fail = false;
  bool warn = false;
  std::vector<std::string> notes;
};

inline CheckSuiteReport run_check_suite(const Trajectory& traj, const EnergySpec& spec,
                                        const JkoConfig& cfg, std::size_t n_sub = 4,
                                        std::vector<double> tau_list = {1e-4, 1e-3, 1e-2, 1e-1}) {
  require(traj.size() >= 2, "run_check_suite: trajectory needs at least one step");
  CheckSuiteReport rep;
  const WassersteinSpace space;
  const FreeEnergyFunctional energy{spec};
  JkoOracle oracle{spec, cfg};

  rep.energy_inequality = energy_inequality_check(space, energy, oracle, traj.records, n_sub);
  rep.warn = rep.energy_inequality.warn;

  if (const auto constants = wasserstein_coercivity(spec)) {
    const std::size_t n = traj.size();
    for (std::size_t k : {std::size_t{0}, n / 2, n - 1}) {
      const auto& r = traj.records[k];
      const double scale = 1.0 + std::abs(r.energy + r.perturbation);
      auto my = moreau_yosida_checks(space, energy, oracle, r.u, r.t, tau_list, *constants,
                                     1e-10 * scale);
      if (my.total_violations() > 0) rep.fail = true;
      rep.moreau_yosida.push_back(std::move(my));
    }
  } else {
    rep.notes.push_back("Moreau-Yosida bounds skipped: no lower bound for the interaction energy");
  }

  rep.estimates = classical_estimates_fp(traj, spec);
  const auto& first = traj.records.front();
  const double slack_tol = 1e-8 * (1.0 + std::abs(first.energy + first.perturbation));
  if (rep.estimates.assembled_slack < -slack_tol) {
    rep.fail = true;
    rep.notes.push_back("assembled descent slack is negative");
  }
  if (!rep.estimates.bounded) rep.fail = true;
  return rep;
}

}  // namespace mmflow

#endif  // MMFLOW_CHECKS_HPP
