#ifndef MMFLOW_IO_HPP
#define MMFLOW_IO_HPP

// CSV output (header row, LF endings, shortest round-trip doubles) and the
// readers needed to reload a stored trajectory.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include "mmflow/config.hpp"
#include "mmflow/energy.hpp"
#include "mmflow/error.hpp"
#include "mmflow/highfreq.hpp"
#include "mmflow/trajectory.hpp"
#include "mmflow/validation.hpp"

namespace mmflow {

namespace fs = std::filesystem;

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
  return f;
}

inline void write_text(const fs::path& path, const std::string& text) {
  auto f = open_output(path);
  f << text;
}

/// One CSV row.
template <class... Fields>
std::string csv_row(const Fields&... fields) {
  std::string out;
  auto put = [&](const auto& v) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(v)>>) {
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
        out += format_double(v);
      else
        out += std::to_string(v);
    } else {
      out += v;
    }
  };
  (put(fields), ...);
  out += '\n';
  return out;
}

inline void write_trajectory_csv(const fs::path& path, const Trajectory& traj, const EnergySpec& spec) {
  auto f = open_output(path);
  f << "k,t_k,tau_k,W2_step,energy_internal,energy_interaction,second_moment,entropy,h1_seminorm,"
       "slope_bound\n";
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    f << csv_row(r.k, r.t, r.tau, std::sqrt(r.d2_prev), r.energy, r.perturbation,
                 r.u.second_moment(), entropy(r.u), h1_seminorm(r.u, spec.m), r.slope_bound);
  }
}

inline void write_density_csv(const fs::path& path, const Density& rho) {
  auto f = open_output(path);
  f << "x,rho\n";
  for (std::size_t j = 0; j < rho.size(); ++j) f << csv_row(rho.grid().center(j), rho[j]);
}

inline void write_particles_csv(const fs::path& path, const QuantileRep& q) {
  auto f = open_output(path);
  f << "i,x\n";
  for (std::size_t i = 0; i < q.size(); ++i) f << csv_row(i, q[i]);
}

inline void write_sweep_csv(const fs::path& path, const SweepResult& res) {
  auto f = open_output(path);
  f << "omega,sup_w2_error\n";
  for (std::size_t i = 0; i < res.omegas.size(); ++i) f << csv_row(res.omegas[i], res.errors[i]);
  f << "# slope=" << format_double(res.fitted_slope)
    << ", constant=" << format_double(res.fitted_constant) << '\n';
}

inline void write_validation_csv(const fs::path& path, const ValidationReport& rep) {
  auto f = open_output(path);
  f << "assumption,estimate,ceiling,pass\n";
  for (const auto& c : rep.checks)
    f << csv_row(c.name, c.estimate, c.ceiling, std::string(to_string(c.outcome)));
  for (const auto& n : rep.notes) f << "# " << n << '\n';
}

/// Full trajectory directory: trajectory.csv plus density_<k>.csv and
/// particles_<k>.csv for every snapshot.
inline void write_run_directory(const fs::path& dir, const Trajectory& traj, const EnergySpec& spec,
                                const Config& cfg) {
  fs::create_directories(dir);
  write_text(dir / "effective_config.txt", emit_config(cfg));
  write_trajectory_csv(dir / "trajectory.csv", traj, spec);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    write_density_csv(dir / ("density_" + std::to_string(k) + ".csv"), traj.snapshots[k].density);
    write_particles_csv(dir / ("particles_" + std::to_string(k) + ".csv"), traj.snapshots[k].particles);
  }
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(f, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace detail

/// Reloads a directory written by write_run_directory. Records are rebuilt
/// from the stored particles, so energies are recomputed exactly.
inline Trajectory read_run_directory(const fs::path& dir, const EnergySpec& spec, const Grid& grid) {
  const auto rows = detail::read_csv(dir / "trajectory.csv");
  require(!rows.empty(), "read_run_directory: empty trajectory.csv", ErrorCode::io);
  Trajectory traj;
  const FreeEnergyFunctional f{spec};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k].size() >= 3, "read_run_directory: malformed trajectory.csv", ErrorCode::io);
    const double t = detail::parse_real("t_k", rows[k][1]);
    const double tau = detail::parse_real("tau_k", rows[k][2]);
    const auto prow = detail::read_csv(dir / ("particles_" + std::to_string(k) + ".csv"));
    std::vector<double> x;
    x.reserve(prow.size());
    for (const auto& r : prow) {
      require(r.size() == 2, "read_run_directory: malformed particles file", ErrorCode::io);
      x.push_back(detail::parse_real("x", r[1]));
    }
    QuantileRep q(std::move(x));
    StepRecord<QuantileRep> rec{k, t, tau, q, 0.0, f.energy(q), f.perturbation(t, q), 0.0};
    if (k > 0) {
      const double d = w2_distance(traj.records.back().u, q);
      rec.d2_prev = d * d;
      rec.slope_bound = d / tau;
    }
    traj.snapshots.push_back(Snapshot{t, q, quantiles_to_density(q, grid)});
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

}  // namespace mmflow

#endif  // MMFLOW_IO_HPP
