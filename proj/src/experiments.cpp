#include "allatonce/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "allatonce/operators.hpp"
#include "allatonce/precond.hpp"

namespace aao {

Problem parse_problem(std::string_view name) {
  if (name == "heat_uniform" || name == "heat") return Problem::heat_uniform;
  if (name == "heat_nonuniform") return Problem::heat_nonuniform;
  if (name == "wave_cd") return Problem::wave_cd;
  if (name == "wave_bd2") return Problem::wave_bd2;
  if (name == "wave_bd4") return Problem::wave_bd4;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

std::string_view to_string(Problem p) noexcept {
  switch (p) {
    case Problem::heat_uniform: return "heat_uniform";
    case Problem::heat_nonuniform: return "heat_nonuniform";
    case Problem::wave_cd: return "wave_cd";
    case Problem::wave_bd2: return "wave_bd2";
    case Problem::wave_bd4: return "wave_bd4";
  }
  return "?";
}

InitialCondition parse_initial_condition(std::string_view name) {
  if (name == "s1") return InitialCondition::s1;
  if (name == "s2") return InitialCondition::s2;
  if (name == "ns") return InitialCondition::ns;
  throw std::invalid_argument("unknown initial condition '" + std::string(name) + "'");
}

std::string_view to_string(InitialCondition ic) noexcept {
  switch (ic) {
    case InitialCondition::s1: return "s1";
    case InitialCondition::s2: return "s2";
    case InitialCondition::ns: return "ns";
  }
  return "?";
}

double initial_value(InitialCondition ic, double x) {
  switch (ic) {
    case InitialCondition::s1:
      return x * (1.0 - x);
    case InitialCondition::s2:
      return std::sin(2.0 * std::numbers::pi * x);
    case InitialCondition::ns: {
      if (x <= 0.375 || x >= 0.625) return 0.0;
      const double c = std::cos(4.0 * std::numbers::pi * (x - 0.5));
      return c * c;
    }
  }
  return 0.0;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (n == 0) fail("n must be positive");
  if (ell == 0) fail("ell must be positive");
  if (workers == 0) fail("workers must be positive");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (maxit == 0) fail("maxit must be positive");
  if (repeats == 0) fail("repeats must be positive");
  if (problem == Problem::heat_nonuniform) {
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
    if (neumann_order == 0) fail("neumann-order must be at least 1");
  }
  const std::size_t min_ell = problem == Problem::wave_cd    ? 2
                              : problem == Problem::wave_bd2 ? 3
                              : problem == Problem::wave_bd4 ? 4
                                                             : 1;
  if (ell < min_ell) fail("ell must be at least " + std::to_string(min_ell) + " for this problem");
}

std::uint64_t digest(std::span<const double> values) noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace {

SystemKind system_of(Problem p) {
  switch (p) {
    case Problem::heat_uniform:
    case Problem::heat_nonuniform: return SystemKind::heat;
    case Problem::wave_cd: return SystemKind::wave_cd;
    case Problem::wave_bd2: return SystemKind::wave_bd2;
    case Problem::wave_bd4: return SystemKind::wave_bd4;
  }
  throw std::invalid_argument("unknown problem");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ExperimentResult run_once(const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  ExperimentResult r;
  r.config = cfg;
  r.space = SpatialGrid(cfg.n);
  r.time = cfg.problem == Problem::heat_nonuniform ? TimeGrid::perturbed(cfg.ell, cfg.delta, cfg.seed)
                                                   : TimeGrid::uniform(cfg.ell);
  const TriDiagMatrix m = assemble_mass(r.space);
  const TriDiagMatrix k = assemble_stiffness(r.space);
  r.u0 = project_initial([&](double x) { return initial_value(cfg.ic, x); }, r.space);

  const SystemKind kind = system_of(cfg.problem);
  const BlockToeplitzOperator op = build_operator(kind, m, k, r.time);
  const MonolithicVector b = build_rhs(kind, m, k, r.time.tau_base, r.u0, cfg.ell);

  ParallelEngine engine(cfg.workers, cfg.strategy);
  const auto t0 = clock::now();
  auto base = std::make_shared<const CirculantPreconditioner>(op.stencil(), cfg.ell);

  LinearMap a = [&](std::span<const double> x, std::span<double> y) { op.apply(engine, x, y); };
  LinearMap pinv;
  std::unique_ptr<NeumannPreconditioner> neumann;
  if (cfg.problem == Problem::heat_nonuniform) {
    neumann = std::make_unique<NeumannPreconditioner>(base, k, r.time.sigma, cfg.neumann_order);
    r.coupling_bound = neumann->coupling_norm_bound();
    pinv = [&](std::span<const double> x, std::span<double> y) { neumann->apply(engine, x, y); };
  } else {
    pinv = [&](std::span<const double> x, std::span<double> y) { base->apply_inverse(engine, x, y); };
  }

  GmresResult sol = gmres(a, pinv, b, cfg.tol, cfg.maxit);
  r.time_total_s = std::chrono::duration<double>(clock::now() - t0).count();
  r.time_precond_s = sol.report.wall_ms_precond / 1000.0;
  r.time_matvec_s = sol.report.wall_ms_matvec / 1000.0;
  r.report = std::move(sol.report);
  r.report.workers = cfg.workers;
  r.solution = std::move(sol.x);
  r.true_residual = residual_true(a, r.solution, b);
  r.digest = digest(r.solution);
  return r;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> total;
  std::vector<double> pre;
  std::vector<double> mat;
  ExperimentResult r;
  for (std::size_t rep = 0; rep < cfg.repeats; ++rep) {
    r = run_once(cfg);
    total.push_back(r.time_total_s);
    pre.push_back(r.time_precond_s);
    mat.push_back(r.time_matvec_s);
  }
  r.time_total_s = median(total);
  r.time_precond_s = median(pre);
  r.time_matvec_s = median(mat);
  return r;
}

void write_csv_header(std::ostream& os) {
  os << "problem,n,ell,p,strategy,delta,seed,neumann_order,ic,tol,iterations,converged,"
        "true_residual,time_total_s,time_precond_s,time_matvec_s\n";
}

void write_csv_row(std::ostream& os, const ExperimentResult& r) {
  const auto& c = r.config;
  const bool nonuniform = c.problem == Problem::heat_nonuniform;
  const auto old = os.precision(10);
  os << to_string(c.problem) << ',' << c.n << ',' << c.ell << ',' << c.workers << ','
     << to_string(c.strategy) << ',';
  if (nonuniform) os << c.delta;
  os << ',' << c.seed << ',';
  if (nonuniform) os << c.neumann_order;
  os << ',' << to_string(c.ic) << ',' << c.tol << ',' << r.report.iterations << ','
     << (r.report.converged ? 1 : 0) << ',' << r.true_residual << ',' << r.time_total_s << ','
     << r.time_precond_s << ',' << r.time_matvec_s << '\n';
  os.precision(old);
}

std::vector<Snapshot> take_snapshots(const ExperimentResult& r, std::size_t stride) {
  const std::size_t n = r.space.n;
  const std::size_t ell = r.time.ell;
  if (stride == 0) stride = (ell + 15) / 16;
  std::vector<Snapshot> out;
  out.push_back({0.0, r.u0});
  auto add = [&](std::size_t k) {
    const auto first = r.solution.begin() + static_cast<std::ptrdiff_t>(k * n);
    out.push_back({r.time.points[k + 1], std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n))});
  };
  for (std::size_t k = stride - 1; k < ell; k += stride) add(k);
  if (ell % stride != 0) add(ell - 1);
  return out;
}

void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps,
                         const SpatialGrid& grid) {
  const auto old = os.precision(12);
  os << "t,x,u\n";
  for (const auto& s : snaps) {
    os << s.t << ',' << 0.0 << ',' << 0.0 << '\n';
    for (std::size_t i = 0; i < s.u.size(); ++i) os << s.t << ',' << grid.node(i) << ',' << s.u[i] << '\n';
    os << s.t << ',' << 1.0 << ',' << 0.0 << '\n';
  }
  os.precision(old);
}

double parallel_efficiency(double time_one, std::size_t p, double time_p) {
  if (p == 0 || !(time_p > 0.0)) throw std::invalid_argument("parallel_efficiency: bad timing");
  return time_one / (static_cast<double>(p) * time_p);
}

std::vector<EfficiencyRecord> scaling_sweep(const ExperimentConfig& cfg,
                                            const std::vector<std::size_t>& worker_list) {
  if (worker_list.empty() || worker_list.front() != 1 ||
      !std::is_sorted(worker_list.begin(), worker_list.end())) {
    throw std::invalid_argument("scaling_sweep: worker list must be sorted and start at 1");
  }
  std::vector<EfficiencyRecord> out;
  std::uint64_t reference = 0;
  double t1 = 0.0;
  for (std::size_t p : worker_list) {
    ExperimentConfig c = cfg;
    c.workers = p;
    const ExperimentResult r = run_experiment(c);
    if (p == 1) {
      reference = r.digest;
      t1 = r.time_total_s;
    } else if (r.digest != reference) {
      throw std::runtime_error("scaling_sweep: solution with p = " + std::to_string(p) +
                               " differs from the serial solution");
    }
    out.push_back({p, r.time_total_s, parallel_efficiency(t1, p, r.time_total_s)});
  }
  return out;
}

void write_efficiency_csv(std::ostream& os, const std::vector<EfficiencyRecord>& records) {
  const auto old = os.precision(10);
  os << "p,time_s,p_eff\n";
  for (const auto& r : records) os << r.p << ',' << r.time_s << ',' << r.p_eff << '\n';
  os.precision(old);
}

std::vector<NeumannRow> neumann_sweep(const ExperimentConfig& cfg,
                                      const std::vector<std::size_t>& orders,
                                      const std::vector<double>& deltas) {
  std::vector<NeumannRow> rows;
  for (double d : deltas) {
    NeumannRow row;
    row.delta = d;
    double t1 = std::numeric_limits<double>::quiet_NaN();
    double t2 = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i : orders) {
      ExperimentConfig c = cfg;
      c.problem = Problem::heat_nonuniform;
      c.delta = d;
      c.neumann_order = i;
      const ExperimentResult r = run_experiment(c);
      row.cells.push_back({i, r.report.iterations, r.report.converged, r.time_total_s});
      if (i == 1) t1 = r.time_total_s;
      if (i == 2) t2 = r.time_total_s;
    }
    row.delta_21 = t2 - t1;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_neumann_csv(std::ostream& os, const std::vector<NeumannRow>& rows) {
  const auto old = os.precision(10);
  os << "delta";
  if (!rows.empty()) {
    for (const auto& c : rows.front().cells) os << ",iters_i" << c.order;
    for (const auto& c : rows.front().cells) os << ",time_i" << c.order << "_s";
  }
  os << ",delta_21_s\n";
  for (const auto& r : rows) {
    os << r.delta;
    for (const auto& c : r.cells) os << ',' << c.iterations;
    for (const auto& c : r.cells) os << ',' << c.time_s;
    os << ',' << r.delta_21 << '\n';
  }
  os.precision(old);
}

double wave_speed(const std::vector<Snapshot>& snaps, const SpatialGrid& grid, double t_min,
                  double t_max) {
  std::vector<double> ts;
  std::vector<double> xs;
  for (const auto& s : snaps) {
    if (s.t < t_min || s.t >= t_max) continue;
    // Interior node i sits at (i+1) h; start at the first node with x >= 1/2.
    const auto first = static_cast<std::size_t>(std::ceil(0.5 / grid.h - 1.0 - 1e-9));
    if (first >= s.u.size()) continue;
    std::size_t best = first;
    for (std::size_t i = first; i < s.u.size(); ++i) {
      if (s.u[i] > s.u[best]) best = i;
    }
    if (!(std::abs(s.u[best]) > 1e-12)) throw std::domain_error("wave_speed: flat profile");
    double x = grid.node(best);
    if (best > 0 && best + 1 < s.u.size()) {
      const double um = s.u[best - 1];
      const double u0 = s.u[best];
      const double up = s.u[best + 1];
      const double curv = um - 2.0 * u0 + up;
      if (curv < 0.0) x += 0.5 * grid.h * (um - up) / curv;
    }
    ts.push_back(s.t);
    xs.push_back(x);
  }
  if (ts.size() < 2) throw std::domain_error("wave_speed: need at least two snapshots in the window");
  double tm = 0.0;
  double xm = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    xm += xs[i];
  }
  tm /= static_cast<double>(ts.size());
  xm /= static_cast<double>(ts.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    num += (ts[i] - tm) * (xs[i] - xm);
    den += (ts[i] - tm) * (ts[i] - tm);
  }
  if (den == 0.0) throw std::domain_error("wave_speed: snapshots share a single time");
  return num / den;
}

double dissipation_metric(const std::vector<Snapshot>& snaps) {
  if (snaps.size() < 2) throw std::invalid_argument("dissipation_metric: need two snapshots");
  auto amp = [](const Snapshot& s) {
    double m = 0.0;
    for (double v : s.u) m = std::max(m, std::abs(v));
    return m;
  };
  const double first = amp(snaps.front());
  if (first == 0.0) throw std::domain_error("dissipation_metric: first snapshot is zero");
  return amp(snaps.back()) / first;
}

}  // namespace aao
