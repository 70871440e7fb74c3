#ifndef MMFLOW_EUCLIDEAN_DEMO_HPP
#define MMFLOW_EUCLIDEAN_DEMO_HPP

// R^n with E(u) = |u|^2 / 2 and P_t(u) = eps sin(2 pi omega t) <b, u>: a
// perturbation that is Lipschitz with constant eps |b| and has zero time
// average, with a closed-form resolvent and gradient-flow solution.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "mmflow/error.hpp"

namespace mmflow {

using EuclideanPoint = std::vector<double>;

struct EuclideanSpace {
  using Point = EuclideanPoint;

  double distance(const Point& u, const Point& v) const {
    require(u.size() == v.size(), "EuclideanSpace: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
  }
};

class EuclideanDemo {
 public:
  EuclideanDemo(double eps, std::vector<double> b, double omega = 1.0)
      : eps_(eps), b_(std::move(b)), omega_(omega) {
    require(!b_.empty(), "EuclideanDemo: b must be nonempty");
    require(omega > 0.0, "EuclideanDemo: omega must be positive");
  }

  std::size_t dimension() const { return b_.size(); }
  double eps() const { return eps_; }
  double omega() const { return omega_; }
  const std::vector<double>& b() const { return b_; }
  double b_norm() const { return std::sqrt(dot(b_, b_)); }

  /// eps sin(2 pi omega t).
  double forcing(double t) const { return eps_ * std::sin(2.0 * std::numbers::pi * omega_ * t); }

  double energy(const EuclideanPoint& u) const { return 0.5 * dot(u, u); }
  double perturbation(double t, const EuclideanPoint& u) const { return forcing(t) * dot(b_, u); }
  double perturbation_dt(double t, const EuclideanPoint& u) const {
    const double k = 2.0 * std::numbers::pi * omega_;
    return eps_ * k * std::cos(k * t) * dot(b_, u);
  }
  double mean_perturbation(const EuclideanPoint&) const { return 0.0; }

  /// Resolvent v = (u - tau eps sin(2 pi omega t) b) / (1 + tau).
  EuclideanPoint solve(double tau, double t, const EuclideanPoint& u) const {
    require(u.size() == b_.size(), "EuclideanDemo: dimension mismatch");
    const double c = forcing(t);
    EuclideanPoint v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = (u[i] - tau * c * b_[i]) / (1.0 + tau);
    return v;
  }

  /// |grad(E + P_t)(v)|, the exact local slope.
  double slope(double t, const EuclideanPoint& v) const {
    const double c = forcing(t);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] + c * b_[i]) * (v[i] + c * b_[i]);
    return std::sqrt(s);
  }

  /// Solution of u' = -u - eps sin(2 pi omega t) b at time t.
  EuclideanPoint exact_solution(const EuclideanPoint& u0, double t) const {
    const double k = 2.0 * std::numbers::pi * omega_;
    const double conv = (std::sin(k * t) - k * std::cos(k * t) + k * std::exp(-t)) / (1.0 + k * k);
    EuclideanPoint u(u0.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-t) * u0[i] - eps_ * b_[i] * conv;
    return u;
  }

  /// Solution of the averaged flow u' = -u.
  static EuclideanPoint averaged_solution(const EuclideanPoint& u0, double t) {
    EuclideanPoint u(u0);
    for (double& x : u) x *= std::exp(-t);
    return u;
  }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

 private:
  double eps_;
  std::vector<double> b_;
  double omega_;
};

}  // namespace mmflow

#endif  // MMFLOW_EUCLIDEAN_DEMO_HPP
