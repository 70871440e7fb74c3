#ifndef MMFLOW_POTENTIALS_HPP
#define MMFLOW_POTENTIALS_HPP

// Time-periodic interaction/confinement potentials W_t(x, y).
//
// A TimePotential is a finite sum of modulated terms a_k(t) * K_k(x, y): a
// periodic time profile times a fixed spatial kernel. Every built-in family
// has this shape, and it keeps rescaling, averaging and linear combination
// exact operations on the representation.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mmflow/error.hpp"
#include "mmflow/quadrature.hpp"

namespace mmflow {

/// Periodic scalar profile a(t) together with its derivative.
class TimeProfile {
 public:
  using Fn = std::function<double(double)>;

  TimeProfile(Fn value, Fn derivative, double period = 1.0, bool constant = false)
      : value_(std::move(value)),
        derivative_(std::move(derivative)),
        period_(period),
        constant_(constant) {
    require(period > 0.0, "TimeProfile: period must be positive");
  }

  static TimeProfile constant(double c) {
    return TimeProfile([c](double) { return c; }, [](double) { return 0.0; }, 1.0, true);
  }

  /// a0 + a1 sin(2 pi t).
  static TimeProfile sinusoidal(double a0, double a1) {
    if (a1 == 0.0) return constant(a0);
    constexpr double k = 2.0 * std::numbers::pi;
    return TimeProfile([=](double t) { return a0 + a1 * std::sin(k * t); },
                       [=](double t) { return a1 * k * std::cos(k * t); });
  }

  double operator()(double t) const { return value_(t); }
  double derivative(double t) const { return derivative_(t); }
  double period() const { return period_; }
  bool is_constant() const { return constant_; }

  TimeProfile rescaled(double omega) const {
    if (constant_) return *this;
    return TimeProfile([v = value_, omega](double t) { return v(omega * t); },
                       [d = derivative_, omega](double t) { return omega * d(omega * t); },
                       period_ / omega);
  }

  TimeProfile scaled(double c) const {
    return TimeProfile([v = value_, c](double t) { return c * v(t); },
                       [d = derivative_, c](double t) { return c * d(t); }, period_,
                       constant_);
  }

 private:
  Fn value_;
  Fn derivative_;
  double period_;
  bool constant_;
};

/// Smooth one-body potential v with derivatives, used by separable kernels.
struct Confinement {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  static Confinement quadratic() {
    return {"quadratic", [](double x) { return 0.5 * x * x; }, [](double x) { return x; },
            [](double) { return 1.0; }};
  }
  static Confinement double_well() {
    return {"double_well", [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; },
            [](double x) { return x * x * x - x; }, [](double x) { return 3.0 * x * x - 1.0; }};
  }
};

/// K(x, y) = c.
struct ConstantKernel {
  double c = 1.0;
};
/// K(x, y) = (x - y)^2 / 2.
struct QuadraticKernel {};
/// K(x, y) = -exp(-(x - y)^2 / (2 s^2)).
struct GaussianKernel {
  double s = 1.0;
};
/// K(x, y) = v(x) + v(y).
struct SeparableKernel {
  Confinement v;
};
/// Arbitrary symmetric kernel given by callables.
struct CustomKernel {
  std::function<double(double, double)> eval;
  std::function<double(double, double)> grad_x;
  std::function<double(double, double)> lap_x;
};

using SpatialKernel =
    std::variant<ConstantKernel, QuadraticKernel, GaussianKernel, SeparableKernel, CustomKernel>;

namespace kernel {

inline double eval(const SpatialKernel& k, double x, double y) {
  struct V {
    double x, y;
    double operator()(const ConstantKernel& c) const { return c.c; }
    double operator()(const QuadraticKernel&) const { return 0.5 * (x - y) * (x - y); }
    double operator()(const GaussianKernel& g) const {
      const double z = (x - y) / g.s;
      return -std::exp(-0.5 * z * z);
    }
    double operator()(const SeparableKernel& s) const { return s.v.value(x) + s.v.value(y); }
    double operator()(const CustomKernel& c) const { return c.eval(x, y); }
  };
  return std::visit(V{x, y}, k);
}

inline double grad_x(const SpatialKernel& k, double x, double y) {
  struct V {
    double x, y;
    double operator()(const ConstantKernel&) const { return 0.0; }
    double operator()(const QuadraticKernel&) const { return x - y; }
    double operator()(const GaussianKernel& g) const {
      const double z = (x - y) / g.s;
      return z / g.s * std::exp(-0.5 * z * z);
    }
    double operator()(const SeparableKernel& s) const { return s.v.d1(x); }
    double operator()(const CustomKernel& c) const { return c.grad_x(x, y); }
  };
  return std::visit(V{x, y}, k);
}

inline double lap_x(const SpatialKernel& k, double x, double y) {
  struct V {
    double x, y;
    double operator()(const ConstantKernel&) const { return 0.0; }
    double operator()(const QuadraticKernel&) const { return 1.0; }
    double operator()(const GaussianKernel& g) const {
      const double z = (x - y) / g.s;
      return (1.0 - z * z) / (g.s * g.s) * std::exp(-0.5 * z * z);
    }
    double operator()(const SeparableKernel& s) const { return s.v.d2(x); }
    double operator()(const CustomKernel& c) const { return c.lap_x(x, y); }
  };
  return std::visit(V{x, y}, k);
}

}  // namespace kernel

struct PotentialTerm {
  TimeProfile profile;
  SpatialKernel kernel;
};

/// Descriptor of a built-in family, kept for reporting and validation.
struct PotentialDescriptor {
  std::string family = "custom";
  double a0 = 0.0;
  double a1 = 0.0;
  double s = 0.0;
  std::string confinement;
  double omega = 1.0;
  bool averaged = false;
};

class TimePotential {
 public:
  TimePotential() = default;
  TimePotential(std::vector<PotentialTerm> terms, PotentialDescriptor descriptor = {},
                double period = 1.0)
      : terms_(std::move(terms)), descriptor_(std::move(descriptor)), period_(period) {}

  double eval(double t, double x, double y) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.profile(t) * kernel::eval(term.kernel, x, y);
    return s;
  }
  double grad_x(double t, double x, double y) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.profile(t) * kernel::grad_x(term.kernel, x, y);
    return s;
  }
  double lap_x(double t, double x, double y) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.profile(t) * kernel::lap_x(term.kernel, x, y);
    return s;
  }
  /// Partial derivative in t.
  double dt(double t, double x, double y) const {
    double s = 0.0;
    for (const auto& term : terms_) {
      if (!term.profile.is_constant()) s += term.profile.derivative(t) * kernel::eval(term.kernel, x, y);
    }
    return s;
  }

  double period() const { return period_; }
  const std::vector<PotentialTerm>& terms() const { return terms_; }
  const PotentialDescriptor& descriptor() const { return descriptor_; }
  bool empty() const { return terms_.empty(); }
  bool is_time_independent() const {
    for (const auto& term : terms_)
      if (!term.profile.is_constant()) return false;
    return true;
  }

  friend TimePotential operator+(const TimePotential& a, const TimePotential& b) {
    require(a.period_ == b.period_, "TimePotential: cannot add potentials of different period");
    std::vector<PotentialTerm> terms = a.terms_;
    terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
    return TimePotential(std::move(terms), {}, a.period_);
  }
  friend TimePotential operator*(double c, const TimePotential& w) {
    std::vector<PotentialTerm> terms;
    terms.reserve(w.terms_.size());
    for (const auto& term : w.terms_) terms.push_back({term.profile.scaled(c), term.kernel});
    return TimePotential(std::move(terms), {}, w.period_);
  }

 private:
  std::vector<PotentialTerm> terms_;
  PotentialDescriptor descriptor_;
  double period_ = 1.0;
};

// Built-in families.

inline TimePotential zero_potential() {
  PotentialDescriptor d;
  d.family = "zero";
  return TimePotential({}, d);
}

inline TimePotential constant_potential(double c) {
  PotentialDescriptor d;
  d.family = "constant";
  d.a0 = c;
  return TimePotential({{TimeProfile::constant(1.0), ConstantKernel{c}}}, d);
}

/// a(t) (x - y)^2 / 2 with a(t) = a0 + a1 sin(2 pi t), a0 > |a1|.
inline TimePotential modulated_quadratic(double a0, double a1) {
  require(a0 > std::abs(a1), "modulated_quadratic: need a0 > |a1|");
  PotentialDescriptor d;
  d.family = "modulated_quadratic";
  d.a0 = a0;
  d.a1 = a1;
  return TimePotential({{TimeProfile::sinusoidal(a0, a1), QuadraticKernel{}}}, d);
}

/// -a(t) exp(-(x - y)^2 / (2 s^2)) with a(t) = a0 + a1 sin(2 pi t).
inline TimePotential gaussian_attraction(double a0, double a1, double s) {
  require(s > 0.0, "gaussian_attraction: width s must be positive");
  PotentialDescriptor d;
  d.family = "gaussian_attraction";
  d.a0 = a0;
  d.a1 = a1;
  d.s = s;
  return TimePotential({{TimeProfile::sinusoidal(a0, a1), GaussianKernel{s}}}, d);
}

/// a(t) (v(x) + v(y)) with a(t) = a0 + a1 sin(2 pi t).
inline TimePotential separable_confinement(double a0, double a1, Confinement v) {
  PotentialDescriptor d;
  d.family = "confinement";
  d.a0 = a0;
  d.a1 = a1;
  d.confinement = v.name;
  return TimePotential({{TimeProfile::sinusoidal(a0, a1), SeparableKernel{std::move(v)}}}, d);
}

/// Potential evaluating W(omega t, x, y); the period becomes period / omega.
inline TimePotential rescale_frequency(const TimePotential& w, double omega) {
  require(omega > 0.0, "rescale_frequency: omega must be positive");
  std::vector<PotentialTerm> terms;
  terms.reserve(w.terms().size());
  for (const auto& term : w.terms()) terms.push_back({term.profile.rescaled(omega), term.kernel});
  PotentialDescriptor d = w.descriptor();
  d.omega *= omega;
  return TimePotential(std::move(terms), d, w.period() / omega);
}

/// Time average over one period by composite Gauss-Legendre quadrature.
inline TimePotential average_potential(const TimePotential& w, std::size_t n_quad = 32) {
  require(n_quad >= 4, "average_potential: n_quad must be >= 4");
  const auto rule = composite_gauss_legendre(n_quad, 0.0, w.period());
  std::vector<PotentialTerm> terms;
  terms.reserve(w.terms().size());
  for (const auto& term : w.terms()) {
    double mean = 0.0;
    if (term.profile.is_constant()) {
      mean = term.profile(0.0);
    } else {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        mean += rule.weights[i] * term.profile(rule.nodes[i]);
      mean /= w.period();
    }
    terms.push_back({TimeProfile::constant(mean), term.kernel});
  }
  PotentialDescriptor d = w.descriptor();
  d.averaged = true;
  return TimePotential(std::move(terms), d, 1.0);
}

}  // namespace mmflow

#endif  // MMFLOW_POTENTIALS_HPP
