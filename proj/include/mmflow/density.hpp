#ifndef MMFLOW_DENSITY_HPP
#define MMFLOW_DENSITY_HPP

// Eulerian (grid) and Lagrangian (equal-mass quantile) views of a probability
// density on a truncated interval.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmflow/error.hpp"

namespace mmflow {

class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_cells)
      : x_min_(x_min), x_max_(x_max), n_cells_(n_cells) {
    require(x_min < x_max, "Grid: x_min must be < x_max");
    require(n_cells > 0, "Grid: n_cells must be positive");
    h_ = (x_max - x_min) / static_cast<double>(n_cells);
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t n_cells() const { return n_cells_; }
  double h() const { return h_; }
  double length() const { return x_max_ - x_min_; }
  double center(std::size_t j) const {
    return x_min_ + (static_cast<double>(j) + 0.5) * h_;
  }
  /// Minimal admissible gap between consecutive quantile particles.
  double min_gap() const { return 1e-10 * length(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_cells_;
  double h_ = 0.0;
};

/// Nonnegative cell values of unit mass (h * sum = 1).
class Density {
 public:
  /// Takes nonnegative cell values and rescales them to unit mass.
  Density(Grid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    require(values_.size() == grid_.n_cells(),
            "Density: value count does not match grid");
    double sum = 0.0;
    for (double v : values_) {
      require(std::isfinite(v) && v >= 0.0,
              "Density: values must be finite and nonnegative");
      sum += v;
    }
    require(sum > 0.0, "Density: zero total mass");
    const double scale = 1.0 / (sum * grid_.h());
    for (double& v : values_) v *= scale;
  }

  /// Midpoint sampling of f, normalized.
  static Density from_function(const Grid& grid,
                               const std::function<double(double)>& f) {
    std::vector<double> v(grid.n_cells());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::max(0.0, f(grid.center(j)));
    return Density(grid, std::move(v));
  }

  /// Cell averages of f given its antiderivative (e.g. a CDF), normalized.
  static Density from_cdf(const Grid& grid,
                          const std::function<double(double)>& cdf) {
    std::vector<double> v(grid.n_cells());
    double left = cdf(grid.x_min());
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double right =
          cdf(grid.x_min() + static_cast<double>(j + 1) * grid.h());
      v[j] = std::max(0.0, right - left);
      left = right;
    }
    return Density(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  std::size_t size() const { return values_.size(); }

  double mass() const {
    return grid_.h() * std::accumulate(values_.begin(), values_.end(), 0.0);
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Strictly increasing positions of M particles of mass 1/M each.
class QuantileRep {
 public:
  explicit QuantileRep(std::vector<double> positions)
      : positions_(std::move(positions)) {
    require(positions_.size() >= 2, "QuantileRep: need at least 2 particles");
    for (std::size_t i = 0; i + 1 < positions_.size(); ++i) {
      require(std::isfinite(positions_[i]) &&
                  positions_[i + 1] > positions_[i],
              "QuantileRep: positions must be finite and strictly increasing");
    }
  }

  std::span<const double> positions() const { return positions_; }
  const std::vector<double>& vector() const { return positions_; }
  std::size_t size() const { return positions_.size(); }
  double operator[](std::size_t i) const { return positions_[i]; }
  double front() const { return positions_.front(); }
  double back() const { return positions_.back(); }

  double mean() const {
    return std::accumulate(positions_.begin(), positions_.end(), 0.0) /
           static_cast<double>(size());
  }
  double second_moment() const {
    double s = 0.0;
    for (double x : positions_) s += x * x;
    return s / static_cast<double>(size());
  }
  double variance() const {
    const double mu = mean();
    double s = 0.0;
    for (double x : positions_) s += (x - mu) * (x - mu);
    return s / static_cast<double>(size());
  }

  friend bool operator==(const QuantileRep&, const QuantileRep&) = default;

 private:
  std::vector<double> positions_;
};

struct Moments {
  double mass = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
};

inline Moments moments(const Density& rho) {
  const Grid& g = rho.grid();
  Moments m;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    const double x = g.center(j);
    const double w = g.h() * rho[j];
    m.mass += w;
    m.mean += w * x;
    m.second_moment += w * x * x;
  }
  return m;
}

namespace detail {

// Pushes positions apart to at least min_gap and back inside [lo, hi].
inline void enforce_min_gap(std::vector<double>& x, double min_gap, double lo,
                            double hi) {
  const std::size_t n = x.size();
  x[0] = std::max(x[0], lo);
  for (std::size_t i = 1; i < n; ++i) x[i] = std::max(x[i], x[i - 1] + min_gap);
  if (x[n - 1] > hi) {
    x[n - 1] = hi;
    for (std::size_t i = n - 1; i-- > 0;) x[i] = std::min(x[i], x[i + 1] - min_gap);
  }
}

}  // namespace detail

/// X_i = F^{-1}((i - 1/2)/M) for the piecewise-linear CDF F of the cell masses.
inline QuantileRep density_to_quantiles(const Density& rho, std::size_t M) {
  require(M >= 2, "density_to_quantiles: M must be >= 2");
  const Grid& g = rho.grid();
  const std::size_t n = g.n_cells();
  std::vector<double> cell_mass(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cell_mass[j] = rho[j] * g.h();
    total += cell_mass[j];
  }
  require(total > 0.0, "density_to_quantiles: zero total mass");

  std::vector<double> x(M);
  std::size_t j = 0;
  double below = 0.0;  // CDF value at the left edge of cell j
  for (std::size_t i = 0; i < M; ++i) {
    const double level =
        total * (static_cast<double>(i) + 0.5) / static_cast<double>(M);
    while (j + 1 < n && (cell_mass[j] <= 0.0 || below + cell_mass[j] < level)) {
      below += cell_mass[j];
      ++j;
    }
    const double frac =
        cell_mass[j] > 0.0 ? std::clamp((level - below) / cell_mass[j], 0.0, 1.0) : 0.5;
    x[i] = g.x_min() + (static_cast<double>(j) + frac) * g.h();
  }
  detail::enforce_min_gap(x, g.min_gap(), g.x_min(), g.x_max());
  return QuantileRep(std::move(x));
}

/// Piecewise-constant density (1/M)/(X_{i+1}-X_i) on each quantile gap, with
/// half a particle mass spread beyond each end particle, deposited
/// conservatively onto grid cells.
inline Density quantiles_to_density(const QuantileRep& q, const Grid& grid) {
  const std::size_t M = q.size();
  const double inv_m = 1.0 / static_cast<double>(M);
  std::vector<double> cells(grid.n_cells(), 0.0);
  const double h = grid.h();

  auto deposit = [&](double a, double b, double value) {
    a = std::max(a, grid.x_min());
    b = std::min(b, grid.x_max());
    if (!(b > a)) return;
    auto cell_of = [&](double x) {
      const auto j = static_cast<std::ptrdiff_t>(std::floor((x - grid.x_min()) / h));
      return static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(grid.n_cells()) - 1));
    };
    const std::size_t ja = cell_of(a);
    const std::size_t jb = cell_of(b);
    for (std::size_t j = ja; j <= jb; ++j) {
      const double lo = std::max(a, grid.x_min() + static_cast<double>(j) * h);
      const double hi = std::min(b, grid.x_min() + static_cast<double>(j + 1) * h);
      if (hi > lo) cells[j] += value * (hi - lo) / h;
    }
  };

  const auto x = q.positions();
  const double first_gap = x[1] - x[0];
  const double last_gap = x[M - 1] - x[M - 2];
  deposit(x[0] - 0.5 * first_gap, x[0], inv_m / first_gap);
  for (std::size_t i = 0; i + 1 < M; ++i) {
    deposit(x[i], x[i + 1], inv_m / (x[i + 1] - x[i]));
  }
  deposit(x[M - 1], x[M - 1] + 0.5 * last_gap, inv_m / last_gap);
  return Density(grid, std::move(cells));
}

inline double l1_distance(const Density& a, const Density& b) {
  require(a.grid() == b.grid(), "l1_distance: grids differ");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return s * a.grid().h();
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Gaussian N(mean, variance) restricted to the grid, built from exact cell
/// masses.
inline Density gaussian_density(const Grid& grid, double mean, double variance) {
  require(variance > 0.0, "gaussian_density: variance must be positive");
  const double sd = std::sqrt(variance);
  return Density::from_cdf(grid, [=](double x) { return normal_cdf((x - mean) / sd); });
}

/// Barenblatt profile of d/dt rho = (rho^m)_xx in one dimension at time t,
/// normalized to unit mass.
inline double barenblatt(double m, double t, double x) {
  require(m > 1.0 && t > 0.0, "barenblatt: need m > 1 and t > 0");
  const double alpha = 1.0 / (m + 1.0);
  const double k = alpha * (m - 1.0) / (2.0 * m);
  // Mass of t^{-alpha}(C - k y^2)_+^{1/(m-1)} is C^{1/(m-1)+1/2} * I / sqrt(k)
  // with I = int_{-1}^{1} (1 - s^2)^{1/(m-1)} ds = B(1/2, p + 1), p = 1/(m-1).
  const double p = 1.0 / (m - 1.0);
  const double beta_integral =
      std::exp(std::lgamma(0.5) + std::lgamma(p + 1.0) - std::lgamma(p + 1.5));
  const double c = std::pow(std::sqrt(k) / beta_integral, 1.0 / (p + 0.5));
  const double y = x * std::pow(t, -alpha);
  const double base = c - k * y * y;
  if (base <= 0.0) return 0.0;
  return std::pow(t, -alpha) * std::pow(base, p);
}

inline Density barenblatt_density(const Grid& grid, double m, double t) {
  return Density::from_function(grid, [=](double x) { return barenblatt(m, t, x); });
}

}  // namespace mmflow

#endif  // MMFLOW_DENSITY_HPP
