// Benchmark and reproduction driver for the all-at-once solvers.
//
//   aao solve     --problem heat_uniform --n 320 --ell 768 --workers 4
//   aao scale     --problem heat_uniform --n 768 --ell 1440 --workers-list 1,2,4,8
//   aao neumann   --n 320 --ell 768 --orders 1,2,3 --deltas 0.9,0.5,0.1
//   aao wave-diag --problem wave_bd2 --n 64 --ell 32 --ic ns
//
// Exit status: 0 converged, 2 not converged, 1 bad configuration or internal error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "allatonce/experiments.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct Options {
  std::string problem = "heat_uniform";
  std::string ic = "s1";
  std::string strategy = "rowsplit";
  std::string out;
  std::string snapshots;
  std::string grid_csv;
  std::size_t snapshot_stride = 0;
  aao::ExperimentConfig cfg;
};

std::size_t default_workers() {
  if (const char* env = std::getenv("AAO_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--problem", o.problem, "heat_uniform|heat_nonuniform|wave_cd|wave_bd2|wave_bd4");
  app->add_option("--n", o.cfg.n, "interior spatial nodes");
  app->add_option("--ell", o.cfg.ell, "time steps");
  app->add_option("--workers", o.cfg.workers, "worker threads (default $AAO_WORKERS or 1)");
  app->add_option("--tol", o.cfg.tol, "GMRES relative tolerance");
  app->add_option("--maxit", o.cfg.maxit, "GMRES iteration cap");
  app->add_option("--delta", o.cfg.delta, "time-step perturbation (heat_nonuniform)");
  app->add_option("--seed", o.cfg.seed, "time-grid seed (heat_nonuniform)");
  app->add_option("--neumann-order", o.cfg.neumann_order, "Neumann series order i");
  app->add_option("--ic", o.ic, "initial condition s1|s2|ns");
  app->add_option("--strategy", o.strategy, "rowsplit|fft");
  app->add_option("--repeats", o.cfg.repeats, "timed repetitions (median reported)");
  app->add_option("--out", o.out, "CSV output path (stdout if empty)");
}

void finalize(Options& o) {
  o.cfg.problem = aao::parse_problem(o.problem);
  o.cfg.ic = aao::parse_initial_condition(o.ic);
  o.cfg.strategy = aao::parse_strategy(o.strategy);
  o.cfg.validate();
}

// Appends to --out, writing the header only when the file is new.
template <class Header, class Body>
void emit(const std::string& path, Header header, Body body) {
  if (path.empty()) {
    header(std::cout);
    body(std::cout);
    return;
  }
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot open " + path);
  if (fresh) header(os);
  body(os);
}

int run_solve(Options& o) {
  finalize(o);
  const aao::ExperimentResult r = aao::run_experiment(o.cfg);
  emit(o.out, aao::write_csv_header, [&](std::ostream& os) { aao::write_csv_row(os, r); });
  if (!o.snapshots.empty()) {
    std::ofstream os(o.snapshots);
    aao::write_snapshots_csv(os, aao::take_snapshots(r, o.snapshot_stride), r.space);
  }
  if (!o.grid_csv.empty()) {
    std::ofstream os(o.grid_csv);
    r.time.write_csv(os);
  }
  if (r.coupling_bound >= 1.0) {
    std::cerr << "warning: max|sigma| * ||K|| bound = " << r.coupling_bound
              << " >= 1, Neumann series convergence is not guaranteed\n";
  }
  return r.report.converged ? kExitConverged : kExitNotConverged;
}

int run_scale(Options& o, const std::vector<std::size_t>& workers) {
  finalize(o);
  const auto records = aao::scaling_sweep(o.cfg, workers);
  emit(o.out, [](std::ostream&) {}, [&](std::ostream& os) { aao::write_efficiency_csv(os, records); });
  return kExitConverged;
}

int run_neumann(Options& o, const std::vector<std::size_t>& orders, const std::vector<double>& deltas) {
  o.problem = "heat_nonuniform";
  finalize(o);
  const auto rows = aao::neumann_sweep(o.cfg, orders, deltas);
  emit(o.out, [](std::ostream&) {}, [&](std::ostream& os) { aao::write_neumann_csv(os, rows); });
  for (const auto& r : rows) {
    for (const auto& c : r.cells) {
      if (!c.converged) return kExitNotConverged;
    }
  }
  return kExitConverged;
}

int run_wave_diag(Options& o) {
  finalize(o);
  const aao::ExperimentResult r = aao::run_experiment(o.cfg);
  const auto snaps = aao::take_snapshots(r, 1);
  std::string speed = "nan";
  try {
    speed = std::to_string(aao::wave_speed(snaps, r.space));
  } catch (const std::domain_error& e) {
    std::cerr << "warning: " << e.what() << '\n';
  }
  const double diss = aao::dissipation_metric(snaps);
  emit(
      o.out,
      [](std::ostream& os) { os << "problem,n,ell,ic,iterations,converged,wave_speed,dissipation\n"; },
      [&](std::ostream& os) {
        os << aao::to_string(o.cfg.problem) << ',' << o.cfg.n << ',' << o.cfg.ell << ','
           << aao::to_string(o.cfg.ic) << ',' << r.report.iterations << ','
           << (r.report.converged ? 1 : 0) << ',' << speed << ',' << diss << '\n';
      });
  if (!o.snapshots.empty()) {
    std::ofstream os(o.snapshots);
    aao::write_snapshots_csv(os, aao::take_snapshots(r, o.snapshot_stride), r.space);
  }
  return r.report.converged ? kExitConverged : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"All-at-once parallel-in-time solver benchmarks"};
  app.require_subcommand(1);

  Options o;
  o.cfg.workers = default_workers();
  o.cfg.repeats = 3;
  std::vector<std::size_t> worker_list{1, 2, 4, 8};
  std::vector<std::size_t> orders{1, 2, 3};
  std::vector<double> deltas{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};

  auto* solve = app.add_subcommand("solve", "run one experiment and emit a CSV row");
  add_common(solve, o);
  solve->add_option("--snapshots", o.snapshots, "write solution profiles (t,x,u) here");
  solve->add_option("--snapshot-stride", o.snapshot_stride, "keep every k-th time chunk (0: ceil(ell/16))");
  solve->add_option("--grid", o.grid_csv, "write the time grid (j,t_j,tau_j,sigma_j) here");

  auto* scale = app.add_subcommand("scale", "strong-scaling sweep with parallel efficiency");
  add_common(scale, o);
  scale->add_option("--workers-list", worker_list, "worker counts, sorted, starting at 1")->delimiter(',');

  auto* neumann = app.add_subcommand("neumann", "Neumann order/perturbation sweep");
  add_common(neumann, o);
  neumann->add_option("--orders", orders, "series orders")->delimiter(',');
  neumann->add_option("--deltas", deltas, "perturbation sizes")->delimiter(',');

  auto* wave = app.add_subcommand("wave-diag", "wave speed and dissipation diagnostics");
  add_common(wave, o);
  wave->add_option("--snapshots", o.snapshots, "write solution profiles (t,x,u) here");
  wave->add_option("--snapshot-stride", o.snapshot_stride, "keep every k-th time chunk");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*solve) return run_solve(o);
    if (*scale) return run_scale(o, worker_list);
    if (*neumann) return run_neumann(o, orders, deltas);
    if (*wave) return run_wave_diag(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
