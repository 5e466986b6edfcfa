#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "allatonce/fem1d.hpp"
#include "allatonce/krylov.hpp"
#include "allatonce/parallel.hpp"
#include "allatonce/timegrid.hpp"

namespace aao {

enum class Problem { heat_uniform, heat_nonuniform, wave_cd, wave_bd2, wave_bd4 };
enum class InitialCondition { s1, s2, ns };

[[nodiscard]] Problem parse_problem(std::string_view name);
[[nodiscard]] std::string_view to_string(Problem p) noexcept;
[[nodiscard]] InitialCondition parse_initial_condition(std::string_view name);
[[nodiscard]] std::string_view to_string(InitialCondition ic) noexcept;

/// s1: x(1-x); s2: sin(2 pi x); ns: cos^2(4 pi (x - 1/2)) on (3/8, 5/8), else 0.
[[nodiscard]] double initial_value(InitialCondition ic, double x);

struct ExperimentConfig {
  Problem problem = Problem::heat_uniform;
  std::size_t n = 64;
  std::size_t ell = 64;
  std::size_t workers = 1;
  double tol = 1e-5;
  double delta = 0.5;
  std::uint64_t seed = 1;
  std::size_t neumann_order = 1;
  InitialCondition ic = InitialCondition::s1;
  Strategy strategy = Strategy::row_split_dft;
  std::size_t maxit = 500;
  std::size_t repeats = 1;  // timings are the median over repeats

  /// Throws std::invalid_argument with the offending field.
  void validate() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  SpatialGrid space;
  TimeGrid time;
  std::vector<double> u0;
  std::vector<double> solution;  // n*ell, chunk k at time time.points[k+1]
  SolveReport report;
  double true_residual = 0.0;
  double time_total_s = 0.0;
  double time_precond_s = 0.0;
  double time_matvec_s = 0.0;
  double coupling_bound = 0.0;  // Neumann diagnostic, 0 unless heat_nonuniform
  std::uint64_t digest = 0;
};

[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// FNV-1a over the bytes of the values.
[[nodiscard]] std::uint64_t digest(std::span<const double> values) noexcept;

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const ExperimentResult& r);

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

/// u0 at t = 0 followed by every stride-th chunk and always the last one.
/// stride 0 selects ceil(ell / 16).
[[nodiscard]] std::vector<Snapshot> take_snapshots(const ExperimentResult& r, std::size_t stride = 0);
/// CSV with header t,x,u including the Dirichlet boundary nodes.
void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps,
                         const SpatialGrid& grid);

struct EfficiencyRecord {
  std::size_t p = 1;
  double time_s = 0.0;
  double p_eff = 0.0;
};

/// T_1 / (p T_p).
[[nodiscard]] double parallel_efficiency(double time_one, std::size_t p, double time_p);

/// Solves the same problem for every worker count; throws std::runtime_error
/// if the solution digests differ. worker_list must be sorted and start at 1.
[[nodiscard]] std::vector<EfficiencyRecord> scaling_sweep(const ExperimentConfig& cfg,
                                                          const std::vector<std::size_t>& worker_list);
void write_efficiency_csv(std::ostream& os, const std::vector<EfficiencyRecord>& records);

struct NeumannCell {
  std::size_t order = 1;
  std::size_t iterations = 0;
  bool converged = false;
  double time_s = 0.0;
};

struct NeumannRow {
  double delta = 0.0;
  std::vector<NeumannCell> cells;  // one per requested order, same order as requested
  double delta_21 = 0.0;           // time(i=2) - time(i=1), NaN if either is missing
};

[[nodiscard]] std::vector<NeumannRow> neumann_sweep(const ExperimentConfig& cfg,
                                                    const std::vector<std::size_t>& orders,
                                                    const std::vector<double>& deltas);
void write_neumann_csv(std::ostream& os, const std::vector<NeumannRow>& rows);

/// Speed of the right-moving pulse: the argmax over x >= 1/2 of each
/// snapshot with t in [t_min, t_max) (refined by a three-point parabola) is
/// fitted against t by least squares. Throws std::domain_error when fewer
/// than two snapshots fall in the window or a profile is flat.
[[nodiscard]] double wave_speed(const std::vector<Snapshot>& snaps, const SpatialGrid& grid,
                                double t_min = 0.125, double t_max = 0.375);

/// max|u| of the last snapshot over max|u| of the first.
[[nodiscard]] double dissipation_metric(const std::vector<Snapshot>& snaps);

}  // namespace aao
