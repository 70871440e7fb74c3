#ifndef MMFLOW_CONFIG_HPP
#define MMFLOW_CONFIG_HPP

// Flat "key = value" experiment configuration. Unknown and repeated keys are
// errors; every error message names the key or line.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "mmflow/density.hpp"
#include "mmflow/energy.hpp"
#include "mmflow/error.hpp"
#include "mmflow/jko.hpp"
#include "mmflow/potentials.hpp"

namespace mmflow {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Config {
  double x_min = -6.0;
  double x_max = 6.0;
  std::size_t n_cells = 800;
  std::size_t M = 400;
  double m = 1.0;
  double omega = 1.0;
  std::string family = "zero";
  double a0 = 1.0;
  double a1 = 0.0;
  double s = 1.0;
  std::string v = "quadratic";
  double T = 0.5;
  double tau = 1e-3;
  double inner_tol = 0.0;  ///< 0 until defaults are applied, then 1e-8 / M
  std::size_t inner_max_iter = 5000;
  std::uint64_t seed = 0;
  std::string initial_profile = "gaussian";
  double initial_mean = 0.0;
  double initial_variance = 0.25;
  double initial_time = 0.1;

  friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& text) {
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(x))
    throw Error(ErrorCode::config, "config: " + key + ": cannot parse '" + text + "' as a real");
  return x;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int x = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::config,
                "config: " + key + ": cannot parse '" + text + "' as a nonnegative integer");
  return x;
}

inline void check(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::config, "config: " + key + ": " + msg);
}

}  // namespace detail

/// Fills defaults that depend on other keys and checks all constraints.
inline Config validated(Config c) {
  using detail::check;
  check(c.x_min < c.x_max, "domain.x_min", "must be < domain.x_max");
  check(c.n_cells >= 2, "grid.n_cells", "must be >= 2");
  check(c.M >= 2, "transport.M", "must be >= 2");
  check(c.m >= 1.0, "energy.m", "m must be >= 1");
  check(c.omega > 0.0, "energy.omega", "must be positive");
  check(c.family == "zero" || c.family == "constant" || c.family == "modulated_quadratic" ||
            c.family == "gaussian_attraction" || c.family == "confinement",
        "potential.family",
        "must be one of zero|constant|modulated_quadratic|gaussian_attraction|confinement");
  if (c.family == "modulated_quadratic")
    check(c.a0 > std::abs(c.a1), "potential.a0", "modulated_quadratic needs a0 > |a1|");
  check(c.s > 0.0, "potential.s", "must be positive");
  check(c.v == "quadratic" || c.v == "double_well", "potential.v", "must be quadratic|double_well");
  check(c.T > 0.0, "time.T", "must be positive");
  check(c.tau > 0.0 && c.tau <= kDefaultTauCap, "time.tau", "must be in (0, 0.1]");
  if (c.inner_tol == 0.0) c.inner_tol = 1e-8 / static_cast<double>(c.M);
  check(c.inner_tol > 0.0, "solver.inner_tol", "must be positive");
  check(c.inner_max_iter >= 1, "solver.inner_max_iter", "must be >= 1");
  check(c.initial_profile == "gaussian" || c.initial_profile == "barenblatt", "initial.profile",
        "must be gaussian|barenblatt");
  check(c.initial_variance > 0.0, "initial.variance", "must be positive");
  check(c.initial_time > 0.0, "initial.time", "must be positive");
  if (c.initial_profile == "barenblatt") check(c.m > 1.0, "initial.profile", "barenblatt needs m > 1");
  return c;
}

/// Parses config text; `#` starts a comment line.
inline Config parse_config_text(const std::string& text) {
  Config c;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config, "config: line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string val = detail::trim(std::string_view(line).substr(eq + 1));
    if (auto it = seen.find(key); it != seen.end()) {
      throw Error(ErrorCode::config, "config: line " + std::to_string(line_no) + ": duplicate key " +
                                         key + " (first set on line " + std::to_string(it->second) + ")");
    }
    seen.emplace(key, line_no);
    using detail::parse_integer;
    using detail::parse_real;
    if (key == "domain.x_min") c.x_min = parse_real(key, val);
    else if (key == "domain.x_max") c.x_max = parse_real(key, val);
    else if (key == "grid.n_cells") c.n_cells = parse_integer<std::size_t>(key, val);
    else if (key == "transport.M") c.M = parse_integer<std::size_t>(key, val);
    else if (key == "energy.m") c.m = parse_real(key, val);
    else if (key == "energy.omega") c.omega = parse_real(key, val);
    else if (key == "potential.family") c.family = val;
    else if (key == "potential.a0") c.a0 = parse_real(key, val);
    else if (key == "potential.a1") c.a1 = parse_real(key, val);
    else if (key == "potential.s") c.s = parse_real(key, val);
    else if (key == "potential.v") c.v = val;
    else if (key == "time.T") c.T = parse_real(key, val);
    else if (key == "time.tau") c.tau = parse_real(key, val);
    else if (key == "solver.inner_tol") c.inner_tol = parse_real(key, val);
    else if (key == "solver.inner_max_iter") c.inner_max_iter = parse_integer<std::size_t>(key, val);
    else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, val);
    else if (key == "initial.profile") c.initial_profile = val;
    else if (key == "initial.mean") c.initial_mean = parse_real(key, val);
    else if (key == "initial.variance") c.initial_variance = parse_real(key, val);
    else if (key == "initial.time") c.initial_time = parse_real(key, val);
    else
      throw Error(ErrorCode::config,
                  "config: line " + std::to_string(line_no) + ": unknown key " + key);
  }
  return validated(c);
}

inline Config parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::config, "config: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

/// Every key with its effective value, in a fixed order.
inline std::string emit_config(const Config& c) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  kv("domain.x_min", format_double(c.x_min));
  kv("domain.x_max", format_double(c.x_max));
  kv("grid.n_cells", std::to_string(c.n_cells));
  kv("transport.M", std::to_string(c.M));
  kv("energy.m", format_double(c.m));
  kv("energy.omega", format_double(c.omega));
  kv("potential.family", c.family);
  kv("potential.a0", format_double(c.a0));
  kv("potential.a1", format_double(c.a1));
  kv("potential.s", format_double(c.s));
  kv("potential.v", c.v);
  kv("time.T", format_double(c.T));
  kv("time.tau", format_double(c.tau));
  kv("solver.inner_tol", format_double(c.inner_tol));
  kv("solver.inner_max_iter", std::to_string(c.inner_max_iter));
  kv("seed", std::to_string(c.seed));
  kv("initial.profile", c.initial_profile);
  kv("initial.mean", format_double(c.initial_mean));
  kv("initial.variance", format_double(c.initial_variance));
  kv("initial.time", format_double(c.initial_time));
  return o.str();
}

inline Grid make_grid(const Config& c) { return Grid(c.x_min, c.x_max, c.n_cells); }

/// The base potential (period 1, not yet rescaled by omega).
inline TimePotential make_potential(const Config& c) {
  if (c.family == "zero") return zero_potential();
  if (c.family == "constant") return constant_potential(c.a0);
  if (c.family == "modulated_quadratic") return modulated_quadratic(c.a0, c.a1);
  if (c.family == "gaussian_attraction") return gaussian_attraction(c.a0, c.a1, c.s);
  return separable_confinement(c.a0, c.a1,
                               c.v == "double_well" ? Confinement::double_well() : Confinement::quadratic());
}

inline EnergySpec make_spec(const Config& c) { return EnergySpec(c.m, make_potential(c), c.omega); }

/// Initial density: a Gaussian, or the Barenblatt profile at initial.time
/// shifted to initial.mean.
inline Density make_initial(const Config& c) {
  const Grid g = make_grid(c);
  if (c.initial_profile == "barenblatt") {
    return Density::from_function(
        g, [&](double x) { return barenblatt(c.m, c.initial_time, x - c.initial_mean); });
  }
  return gaussian_density(g, c.initial_mean, c.initial_variance);
}

inline JkoConfig make_jko_config(const Config& c) {
  JkoConfig j;
  j.M = c.M;
  j.tau = TauSchedule::uniform(c.tau);
  j.T = c.T;
  j.inner_tol = c.inner_tol;
  j.inner_max_iter = c.inner_max_iter;
  j.with_domain(make_grid(c));
  return j;
}

}  // namespace mmflow

#endif  // MMFLOW_CONFIG_HPP
