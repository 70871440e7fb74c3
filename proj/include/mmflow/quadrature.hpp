#ifndef MMFLOW_QUADRATURE_HPP
#define MMFLOW_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "mmflow/error.hpp"

namespace mmflow {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b]. Nodes are the roots of P_n found by
/// Newton iteration from the Chebyshev-like initial guesses.
inline QuadratureRule gauss_legendre(std::size_t n, double a = -1.0,
                                     double b = 1.0) {
  require(n >= 1, "gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 -
              static_cast<double>(j) * p2) /
             (static_cast<double>(j) + 1.0);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

/// Composite Gauss-Legendre with n_nodes nodes in total on [a, b]: panels of 8
/// nodes when n_nodes is a multiple of 8, otherwise a single panel.
inline QuadratureRule composite_gauss_legendre(std::size_t n_nodes, double a,
                                               double b) {
  require(n_nodes >= 1, "composite_gauss_legendre: need at least one node");
  const std::size_t per_panel = (n_nodes % 8 == 0) ? 8 : n_nodes;
  const std::size_t panels = n_nodes / per_panel;
  QuadratureRule out;
  out.nodes.reserve(n_nodes);
  out.weights.reserve(n_nodes);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    auto panel = gauss_legendre(per_panel, lo, lo + width);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(),
                       panel.weights.end());
  }
  return out;
}

}  // namespace mmflow

#endif  // MMFLOW_QUADRATURE_HPP
