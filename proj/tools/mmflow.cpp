// Command-line driver: single runs, frequency sweeps, the finite-volume
// oracle, potential validation, invariant checks and the Euclidean demo.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmflow/mmflow.hpp"

namespace fs = std::filesystem;
using namespace mmflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonConverged = 3;
constexpr int kExitInvariant = 4;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_real(what, detail::trim(item)));
  if (out.empty()) throw Error(ErrorCode::config, std::string(what) + ": empty list");
  return out;
}

std::string omega_dir(double omega) { return "omega_" + format_double(omega); }

int cmd_run(const std::string& config_path, const fs::path& out) {
  const Config cfg = parse_config(config_path);
  fs::create_directories(out);
  write_text(out / "effective_config.txt", emit_config(cfg));
  const EnergySpec spec = make_spec(cfg);
  const Trajectory traj = run_jko(make_initial(cfg), spec, make_jko_config(cfg));
  write_run_directory(out, traj, spec, cfg);
  if (traj.soft_warnings > 0)
    std::cerr << "warning: " << traj.soft_warnings << " steps ended between tol and 100 tol\n";
  std::cout << "run: " << traj.records.size() - 1 << " steps to t = " << format_double(traj.back().t)
            << ", output in " << out.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& omegas_text, const fs::path& out,
              std::size_t threads) {
  const Config cfg = parse_config(config_path);
  const auto omegas = parse_list(omegas_text, "--omegas");
  fs::create_directories(out);
  write_text(out / "effective_config.txt", emit_config(cfg));
  const TimePotential w = make_potential(cfg);
  const auto sweep = sweep_omega_runs(make_initial(cfg), w, cfg.m, omegas, make_jko_config(cfg),
                                      threads == 0 ? detail::default_threads() : threads);
  write_sweep_csv(out / "sweep.csv", sweep.result);

  auto monitors = open_output(out / "monitors.csv");
  monitors << "omega,dissipation_sum,max_energy,max_second_moment,h1_monitor,holder_modulus\n";
  bool failed = false;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!sweep.failures[i].empty()) {
      std::cerr << "omega " << format_double(omegas[i]) << ": " << sweep.failures[i] << '\n';
      failed = true;
      continue;
    }
    const auto& run = sweep.runs[i];
    const EnergySpec spec(cfg.m, w, omegas[i]);
    const fs::path dir = out / omega_dir(omegas[i]);
    write_trajectory_csv(dir / "trajectory.csv", run, spec);
    write_density_csv(dir / "density_final.csv", run.back().density);
    const auto est = classical_estimates_fp(run, spec);
    monitors << csv_row(omegas[i], est.dissipation_sum, est.max_energy, est.max_second_moment,
                        h1_monitor(run, spec), holder_modulus(run, cfg.M));
  }
  const fs::path avg = out / "averaged";
  write_trajectory_csv(avg / "trajectory.csv", sweep.averaged,
                       EnergySpec(cfg.m, average_potential(w), 1.0));
  write_density_csv(avg / "density_final.csv", sweep.averaged.back().density);
  std::cout << "sweep: slope=" << format_double(sweep.result.fitted_slope)
            << ", constant=" << format_double(sweep.result.fitted_constant) << '\n';
  return failed ? kExitNonConverged : kExitOk;
}

int cmd_oracle(const std::string& config_path, const std::string& compare, double tol,
               const fs::path& out) {
  const Config cfg = parse_config(config_path);
  const EnergySpec spec = make_spec(cfg);
  const Density rho0 = make_initial(cfg);
  fs::create_directories(out);
  write_density_csv(out / "fv_density.csv", fv_run(rho0, spec, cfg.T));
  if (compare.empty()) return kExitOk;

  const Trajectory traj = read_run_directory(compare, spec, make_grid(cfg));
  const auto rep = cross_validate(traj, rho0, spec, tol);
  auto f = open_output(out / "cross_validation.csv");
  f << "t,w2\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) f << csv_row(rep.times[i], rep.w2[i]);
  f << "# max_w2=" << format_double(rep.max_w2) << ", tol=" << format_double(tol)
    << ", pass=" << (rep.pass ? "true" : "false") << '\n';
  std::cout << "oracle: max W2 = " << format_double(rep.max_w2) << (rep.pass ? " PASS" : " FAIL") << '\n';
  return rep.pass ? kExitOk : kExitInvariant;
}

int cmd_validate(const std::string& config_path, const fs::path& out, std::size_t samples) {
  const Config cfg = parse_config(config_path);
  const auto rep = validate_assumptions(make_potential(cfg), make_grid(cfg), cfg.T, samples, cfg.seed);
  write_validation_csv(out / "validation.csv", rep);
  for (const auto& c : rep.checks)
    std::cout << c.name << ' ' << format_double(c.estimate) << ' ' << to_string(c.outcome) << '\n';
  for (const auto& n : rep.notes) std::cout << "note: " << n << '\n';
  return kExitOk;
}

int cmd_check(const fs::path& in) {
  const Config cfg = parse_config((in / "effective_config.txt").string());
  const EnergySpec spec = make_spec(cfg);
  const Trajectory traj = read_run_directory(in, spec, make_grid(cfg));
  const auto rep = run_check_suite(traj, spec, make_jko_config(cfg));

  auto f = open_output(in / "checks.csv");
  f << "check,value,tolerance,status\n";
  const auto& ei = rep.energy_inequality;
  f << csv_row(std::string("energy_inequality_max_violation"), ei.max_violation, ei.tolerance,
               std::string(ei.warn ? "WARN" : "PASS"));
  for (std::size_t i = 0; i < rep.moreau_yosida.size(); ++i) {
    const auto& my = rep.moreau_yosida[i];
    f << csv_row("moreau_yosida_" + std::to_string(i), static_cast<double>(my.total_violations()), 0.0,
                 std::string(my.total_violations() == 0 ? "PASS" : "FAIL"));
  }
  const auto& est = rep.estimates;
  f << csv_row(std::string("assembled_slack"), est.assembled_slack, 0.0,
               std::string(est.assembled_slack >= -1e-8 ? "PASS" : "FAIL"));
  f << csv_row(std::string("dissipation_sum"), est.dissipation_sum, 1e6,
               std::string(est.bounded ? "PASS" : "FAIL"));
  f << csv_row(std::string("max_second_moment"), est.max_second_moment, 1e6,
               std::string(est.bounded ? "PASS" : "FAIL"));
  f << csv_row(std::string("max_abs_entropy"), est.max_abs_entropy, 1e6,
               std::string(est.bounded ? "PASS" : "FAIL"));
  for (const auto& n : rep.notes) f << "# " << n << '\n';
  std::cout << "check: " << (rep.fail ? "FAIL" : rep.warn ? "WARN" : "PASS") << '\n';
  return rep.fail ? kExitInvariant : kExitOk;
}

int cmd_demo(double eps, const std::string& b_text, const std::string& omegas_text, double tau,
             double T, const fs::path& out) {
  const auto b = parse_list(b_text, "--b");
  const auto omegas = parse_list(omegas_text, "--omegas");
  if (!(tau > 0.0) || !(T > 0.0)) throw Error(ErrorCode::config, "demo: --tau and --T must be positive");
  const EuclideanPoint u0(b.size(), 1.0);
  const auto sweep = sweep_omega_euclidean(u0, eps, b, omegas, tau, T);
  auto f = open_output(out / "demo_sweep.csv");
  f << "omega,scheme_error,analytic_error\n";
  for (std::size_t i = 0; i < omegas.size(); ++i)
    f << csv_row(omegas[i], sweep.scheme.errors[i], sweep.analytic.errors[i]);
  f << "# scheme slope=" << format_double(sweep.scheme.fitted_slope)
    << ", analytic slope=" << format_double(sweep.analytic.fitted_slope) << '\n';
  std::cout << "demo: scheme slope=" << format_double(sweep.scheme.fitted_slope)
            << ", analytic slope=" << format_double(sweep.analytic.fitted_slope) << '\n';
  return kExitOk;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::config:
    case ErrorCode::invalid_argument:
      return kExitConfig;
    case ErrorCode::non_converged:
    case ErrorCode::cfl_degenerate:
      return kExitNonConverged;
    case ErrorCode::invariant_failure:
      return kExitInvariant;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimizing-movement solver for 1D Fokker-Planck equations with oscillating potentials"};
  app.require_subcommand(1);

  std::string config, out = ".", omegas = "1,2,4,8,16,32,64", compare, in, b = "1";
  double tol = 0.05, eps = 0.5, tau = 1e-3, T = 1.0;
  std::size_t threads = 0, samples = 2000;

  auto* run = app.add_subcommand("run", "single JKO trajectory");
  run->add_option("--config", config)->required();
  run->add_option("--out", out);

  auto* sweep = app.add_subcommand("sweep", "frequency sweep against the averaged problem");
  sweep->add_option("--config", config)->required();
  sweep->add_option("--omegas", omegas);
  sweep->add_option("--out", out);
  sweep->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* oracle = app.add_subcommand("oracle", "finite-volume run and cross-validation");
  oracle->add_option("--config", config)->required();
  oracle->add_option("--compare", compare, "trajectory directory written by run");
  oracle->add_option("--tol", tol);
  oracle->add_option("--out", out);

  auto* validate = app.add_subcommand("validate-potential", "sampled regularity report");
  validate->add_option("--config", config)->required();
  validate->add_option("--out", out);
  validate->add_option("--samples", samples);

  auto* check = app.add_subcommand("check", "invariant suite on a stored trajectory");
  check->add_option("--in", in)->required();

  auto* demo = app.add_subcommand("demo", "Euclidean minimizing-movement demo sweep");
  demo->add_option("--eps", eps);
  demo->add_option("--b", b, "comma-separated vector");
  demo->add_option("--omegas", omegas);
  demo->add_option("--tau", tau);
  demo->add_option("--T", T);
  demo->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out);
    if (*sweep) return cmd_sweep(config, omegas, out, threads);
    if (*oracle) return cmd_oracle(config, compare, tol, out);
    if (*validate) return cmd_validate(config, out, samples);
    if (*check) return cmd_check(in);
    if (*demo) return cmd_demo(eps, b, omegas, tau, T, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
